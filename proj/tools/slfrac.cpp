// Command-line front end: run, check-mesh, verify.
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "slfrac/error.hpp"
#include "slfrac/io.hpp"
#include "slfrac/verification.hpp"

namespace fs = std::filesystem;
using namespace slfrac;

namespace {

int cmd_run(const std::string& config_path, int algorithm, const std::string& out_override) {
  SimulationConfig cfg = config_path.empty() ? parse_config("") : load_config(config_path);
  if (algorithm != 0) cfg.algorithm = algorithm;
  if (!out_override.empty()) cfg.out_dir = out_override;
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);

  RunManifest manifest;
  manifest.start_time = utc_timestamp();
  manifest.config_echo = echo_config(cfg);
  {
    std::FILE* f = std::fopen((dir / "config.txt").c_str(), "w");
    if (!f) throw Error("cannot write " + (dir / "config.txt").string());
    std::fputs(manifest.config_echo.c_str(), f);
    std::fclose(f);
    manifest.files.push_back("config.txt");
  }

  RunObserver obs;
  obs.on_step = [&](const EnergyRecord& rec, const StepResult& res, const DiscreteState& st) {
    std::fprintf(stderr, "step %d t=%.4f nelem=%zu refines=%d sweeps=%d stalls=%d eta=%.3e total=%.6e\n", rec.step,
                 rec.time, rec.nelem, rec.nrefines, rec.sweeps, res.picard_stalls, res.eta, rec.total);
    if (rec.step % cfg.out_stride != 0 && rec.step != cfg.steps) return;
    IndicatorOptions opt;
    opt.crack_edges = st.crack.crack_edges(st.mesh);
    const ElementIndicators eta = compute_indicators(st.mesh, st.u, st.v, res.params, opt);
    char name[64];
    std::snprintf(name, sizeof name, "fields_%04d.vtk", rec.step);
    write_vtk(st.mesh, {{"u", &st.u}, {"v", &st.v}}, {{"eta_sq", &eta.eta_sq}, {"eta_tilde_sq", &eta.eta_tilde_sq},
                                                      {"eta_hat_sq", &eta.eta_hat_sq}},
              (dir / name).string());
    manifest.files.push_back(name);
  };
  const SimulationResult result = run_quasi_static(cfg, obs);

  write_energy_csv(result.records, (dir / "energy.csv").string());
  write_iteration_log(result.log, (dir / "iterations.csv").string());
  manifest.files.push_back("energy.csv");
  manifest.files.push_back("iterations.csv");
  manifest.steps = result.records.size();
  manifest.end_time = utc_timestamp();
  write_manifest(manifest, (dir / "manifest.json").string());
  std::printf("wrote %zu steps to %s\n", result.records.size(), cfg.out_dir.c_str());
  return 0;
}

int cmd_check_mesh(const std::string& config_path) {
  const SimulationConfig cfg = load_config(config_path);
  const Mesh mesh = build_unit_square_with_slit(cfg.n_initial, cfg.slit_tip_y);
  const ConformityReport conf = check_conformity(mesh);
  const auto sign = check_stiffness_sign_condition(mesh);
  std::printf("vertices %zu\nelements %zu\nedges %zu\n", mesh.num_vertices(), mesh.num_elements(), mesh.num_edges());
  std::printf("conforming %s\n", conf.conforming ? "yes" : "no");
  for (const std::string& p : conf.problems) std::printf("  %s\n", p.c_str());
  std::printf("sign_condition_violations %zu\n", sign.size());
  for (const auto& s : sign) std::printf("  (%d,%d) %.3e\n", s.i, s.j, s.a_ij);
  std::printf("min_angle_deg %.6f\nshape_regularity %.6f\n", min_angle(mesh) * 180.0 / 3.14159265358979323846,
              shape_regularity(mesh));
  return conf.conforming ? 0 : 1;
}

int cmd_verify(std::uint64_t seed) {
  const auto reports = run_verification_suite(seed);
  std::printf("%s\n", oracle_csv_header().c_str());
  bool ok = true;
  for (const OracleReport& r : reports) {
    std::printf("%s\n", to_csv(r).c_str());
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive phase-field fracture with strain-limiting elasticity"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, mesh_config;
  int algorithm = 0;
  std::uint64_t seed = 20240601;

  auto* run = app.add_subcommand("run", "quasi-static simulation");
  run->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
  run->add_option("--algorithm", algorithm, "adaptive algorithm")->check(CLI::IsMember({1, 2, 3}));
  run->add_option("--out", out_dir, "output directory");

  auto* check = app.add_subcommand("check-mesh", "conformity and sign-condition report for the initial mesh");
  check->add_option("--config", mesh_config, "key=value configuration file")->required()->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "run the oracle property suites");
  verify->add_option("--seed", seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return cmd_run(config_path, algorithm, out_dir);
    if (*check) return cmd_check_mesh(mesh_config);
    if (*verify) return cmd_verify(seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
