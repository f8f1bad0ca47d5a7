#include "slfrac/io.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "slfrac/error.hpp"

namespace slfrac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& value) {
  double x = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) {
    throw ConfigError("config: " + key + " expects a number, got '" + value + "'");
  }
  return x;
}

long to_int(const std::string& key, const std::string& value) {
  long x = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec != std::errc() || ptr != end) throw ConfigError("config: " + key + " expects an integer, got '" + value + "'");
  return x;
}

struct Key {
  std::function<void(SimulationConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const SimulationConfig&)> get;
};

template <class F>
Key real(F field) {
  return {[field](SimulationConfig& c, const std::string& k, const std::string& v) { field(c) = to_double(k, v); },
          [field](const SimulationConfig& c) { return fmt(field(const_cast<SimulationConfig&>(c))); }};
}

template <class F>
Key integer(F field) {
  return {[field](SimulationConfig& c, const std::string& k, const std::string& v) {
            const long x = to_int(k, v);
            if (x < -2147483647L || x > 2147483647L) throw ConfigError("config: " + k + " out of range");
            field(c) = static_cast<int>(x);
          },
          [field](const SimulationConfig& c) { return std::to_string(field(const_cast<SimulationConfig&>(c))); }};
}

template <class F>
Key flag(F field) {
  return {[field](SimulationConfig& c, const std::string& k, const std::string& v) {
            if (v == "1" || v == "true") field(c) = true;
            else if (v == "0" || v == "false") field(c) = false;
            else throw ConfigError("config: " + k + " expects 0 or 1, got '" + v + "'");
          },
          [field](const SimulationConfig& c) {
            return std::string(field(const_cast<SimulationConfig&>(c)) ? "1" : "0");
          }};
}

const std::vector<std::pair<std::string, Key>>& keys() {
  using C = SimulationConfig;
  static const std::vector<std::pair<std::string, Key>> table = {
      {"model.alpha", real([](C& c) -> double& { return c.model.alpha; })},
      {"model.beta", real([](C& c) -> double& { return c.model.beta; })},
      {"model.kappa", real([](C& c) -> double& { return c.model.kappa; })},
      {"model.lambda_c", real([](C& c) -> double& { return c.model.lambda_c; })},
      {"model.c_w", real([](C& c) -> double& { return c.model.c_w; })},
      {"model.epsilon_mode",
       {[](C& c, const std::string& k, const std::string& v) {
          if (v == "fixed") c.epsilon_mode = EpsilonMode::fixed;
          else if (v == "mesh_scaled") c.epsilon_mode = EpsilonMode::mesh_scaled;
          else throw ConfigError("config: " + k + " must be fixed or mesh_scaled");
        },
        [](const C& c) { return std::string(c.epsilon_mode == EpsilonMode::fixed ? "fixed" : "mesh_scaled"); }}},
      {"model.epsilon_multiplier", real([](C& c) -> double& { return c.epsilon_multiplier; })},
      {"adapt.theta", real([](C& c) -> double& { return c.adapt.theta; })},
      {"adapt.xi_rf", real([](C& c) -> double& { return c.adapt.xi_rf; })},
      {"adapt.xi_v", real([](C& c) -> double& { return c.adapt.xi_v; })},
      {"adapt.xi_vn", real([](C& c) -> double& { return c.adapt.xi_vn; })},
      {"adapt.xi_cr", real([](C& c) -> double& { return c.adapt.xi_cr; })},
      {"adapt.algorithm", integer([](C& c) -> int& { return c.algorithm; })},
      {"adapt.rf_decay", real([](C& c) -> double& { return c.adapt.rf_decay; })},
      {"adapt.c_irr", real([](C& c) -> double& { return c.c_irr; })},
      {"adapt.max_refines", integer([](C& c) -> int& { return c.adapt.max_refines; })},
      {"adapt.max_outer", integer([](C& c) -> int& { return c.adapt.max_outer; })},
      {"adapt.max_elements",
       {[](C& c, const std::string& k, const std::string& v) {
          const long x = to_int(k, v);
          if (x < 1) throw ConfigError("config: " + k + " must be positive");
          c.adapt.max_elements = static_cast<std::size_t>(x);
        },
        [](const C& c) { return std::to_string(c.adapt.max_elements); }}},
      {"adapt.strict", flag([](C& c) -> bool& { return c.adapt.strict; })},
      {"time.steps", integer([](C& c) -> int& { return c.steps; })},
      {"time.dt", real([](C& c) -> double& { return c.dt; })},
      {"time.load_rate", real([](C& c) -> double& { return c.load_rate; })},
      {"mesh.n_initial", integer([](C& c) -> int& { return c.n_initial; })},
      {"mesh.slit_tip_y", real([](C& c) -> double& { return c.slit_tip_y; })},
      {"solver.tol_lin", real([](C& c) -> double& { return c.solver.tol_lin; })},
      {"solver.tol_picard", real([](C& c) -> double& { return c.solver.tol_picard; })},
      {"solver.max_sweeps", integer([](C& c) -> int& { return c.adapt.max_sweeps; })},
      {"solver.max_picard", integer([](C& c) -> int& { return c.solver.max_picard; })},
      {"solver.lumped", flag([](C& c) -> bool& { return c.solver.lumped; })},
      {"out.dir",
       {[](C& c, const std::string&, const std::string& v) { c.out_dir = v; },
        [](const C& c) { return c.out_dir; }}},
      {"out.stride", integer([](C& c) -> int& { return c.out_stride; })},
  };
  return table;
}

}  // namespace

SimulationConfig parse_config(const std::string& text) {
  SimulationConfig cfg;
  std::map<std::string, const Key*> index;
  for (const auto& [name, key] : keys()) index.emplace(name, &key);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty value for " + key);
    it->second->set(cfg, key, value);
  }
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

SimulationConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string echo_config(const SimulationConfig& cfg) {
  std::string out;
  for (const auto& [name, key] : keys()) out += name + " = " + key.get(cfg) + "\n";
  return out;
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path);
  return f;
}

}  // namespace

void write_vtk(const Mesh& mesh, const std::vector<PointField>& point_data, const std::vector<CellField>& cell_data,
               const std::string& path) {
  for (const auto& [name, f] : point_data) require_bound(*f, mesh, "write_vtk");
  for (const auto& [name, c] : cell_data) {
    if (c->size() != mesh.num_elements()) throw MeshMismatch("write_vtk: cell array " + name + " has the wrong size");
  }
  std::ofstream f = open_output(path);
  f << "# vtk DataFile Version 3.0\nslfrac\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec2& p : mesh.vertices()) f << fmt(p.x) << ' ' << fmt(p.y) << " 0\n";
  f << "CELLS " << mesh.num_elements() << ' ' << 4 * mesh.num_elements() << '\n';
  for (const Triangle& t : mesh.elements()) f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  f << "CELL_TYPES " << mesh.num_elements() << '\n';
  for (std::size_t i = 0; i < mesh.num_elements(); ++i) f << "5\n";
  if (!point_data.empty()) {
    f << "POINT_DATA " << mesh.num_vertices() << '\n';
    for (const auto& [name, field] : point_data) {
      f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double x : field->values) f << fmt(x) << '\n';
    }
  }
  if (!cell_data.empty()) {
    f << "CELL_DATA " << mesh.num_elements() << '\n';
    for (const auto& [name, cells] : cell_data) {
      f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double x : *cells) f << fmt(x) << '\n';
    }
  }
  if (!f) throw Error("write failed: " + path);
}

void write_energy_csv(const std::vector<EnergyRecord>& records, const std::string& path) {
  std::ofstream f = open_output(path);
  f << "step,time,bulk,surface,total,ndof,nelem,nrefines,sweeps\n";
  for (const EnergyRecord& r : records) {
    f << r.step << ',' << fmt(r.time) << ',' << fmt(r.bulk) << ',' << fmt(r.surface) << ',' << fmt(r.total) << ','
      << r.ndof << ',' << r.nelem << ',' << r.nrefines << ',' << r.sweeps << '\n';
  }
  if (!f) throw Error("write failed: " + path);
}

void write_iteration_log(const std::vector<IterationRow>& rows, const std::string& path) {
  std::ofstream f = open_output(path);
  f << "step,outer,sweep,refine_round,phase,ndof,nelem,eta_tilde,eta_hat,eta,tolerance,bulk,surface,total\n";
  for (const IterationRow& r : rows) {
    f << r.step << ',' << r.outer << ',' << r.sweep << ',' << r.refine_round << ',' << r.phase << ',' << r.ndof << ','
      << r.nelem << ',' << fmt(r.eta_tilde) << ',' << fmt(r.eta_hat) << ',' << fmt(r.eta) << ',' << fmt(r.tolerance)
      << ',' << fmt(r.bulk) << ',' << fmt(r.surface) << ',' << fmt(r.total) << '\n';
  }
  if (!f) throw Error("write failed: " + path);
}

void write_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::json j;
  j["version"] = m.version;
  j["config"] = m.config_echo;
  j["start_time"] = m.start_time;
  j["end_time"] = m.end_time;
  j["steps"] = m.steps;
  j["files"] = m.files;
  std::ofstream f = open_output(path);
  f << j.dump(2) << '\n';
  if (!f) throw Error("write failed: " + path);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace slfrac
