#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slfrac/driver.hpp"
#include "slfrac/error.hpp"
#include "slfrac/io.hpp"
#include "slfrac/sparse.hpp"
#include "slfrac/verification.hpp"

using namespace slfrac;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Line> g_lines;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  g_lines.push_back({id, name, pass, detail});
  std::printf("criterion %2d %-26s %s  %s\n", id, name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

NodalField random_field(const Mesh& mesh, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> vals(mesh.num_vertices());
  for (auto& x : vals) x = dist(rng);
  return NodalField(mesh, std::move(vals));
}

NodalField random_test_function(const Mesh& mesh, std::mt19937_64& rng) {
  NodalField psi = random_field(mesh, rng, -1.0, 1.0);
  const auto& d = mesh.dirichlet_vertices();
  for (std::size_t i = 0; i < psi.values.size(); ++i) {
    if (d[i]) psi[i] = 0.0;
  }
  return psi;
}

SimulationConfig reference_config() {
  SimulationConfig cfg;
  cfg.model.alpha = 1.0;
  cfg.model.beta = 1.0;
  cfg.model.kappa = 1e-10;
  cfg.model.lambda_c = 2.7;
  cfg.model.c_w = 8.0 / 3.0;
  cfg.steps = 60;
  cfg.dt = 0.01;
  return cfg;
}

// Nodal field equal to u on Dirichlet vertices and zero elsewhere.
NodalField dirichlet_lift(const Mesh& mesh, const NodalField& u) {
  std::vector<double> f(mesh.num_vertices(), 0.0);
  const auto& d = mesh.dirichlet_vertices();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (d[i]) f[i] = u[i];
  }
  return NodalField(mesh, std::move(f));
}

void criterion1(std::mt19937_64& rng) {
  const auto t0 = Clock::now();
  const Mesh mesh = build_unit_square_with_slit(8, 0.5);
  ModelParams p;
  p.epsilon = 10.0 * mesh.min_diameter();
  double worst = 1e300;
  bool ok = true;
  for (double beta : {0.0, 1.0}) {
    for (bool lumped : {false, true}) {
      p.beta = beta;
      const NodalField u = random_field(mesh, rng, -1.0, 1.0);
      const NodalField v = random_field(mesh, rng, 0.1, 1.0);
      const NodalField psi = random_test_function(mesh, rng);
      const NodalField phi = random_field(mesh, rng, -1.0, 1.0);
      const auto sweep = gradient_sweep(mesh, u, v, psi, phi, p, {1e-2, 1e-3, 1e-4, 1e-5}, lumped);
      const double order = sweep.exact ? 2.0 : sweep.order;
      worst = std::min(worst, order);
      ok = ok && order >= 0.9;
    }
  }
  const double dt = seconds_since(t0);
  report(1, "frechet-derivative", ok && dt < 10.0,
         fmt("elements=%zu min_order=%.3f runtime=%.2fs", mesh.num_elements(), worst, dt));
}

void criterion3() {
  // strain-limited case at the reference loads and a near-linear damaging case
  std::size_t sweeps = 0, violations = 0;
  double worst_u = 0.0, worst_v = 0.0;
  for (int variant = 0; variant < 2; ++variant) {
    SimulationConfig cfg = reference_config();
    cfg.model.kappa = 1e-2;
    cfg.n_initial = 8;
    cfg.adapt.max_refines = 4;
    cfg.adapt.max_elements = 20000;
    if (variant == 0) {
      cfg.steps = 3;
    } else {
      cfg.model.beta = 0.0;
      cfg.steps = 4;
      cfg.dt = 0.25;
      cfg.load_rate = 2.0;
    }
    RunObserver obs;
    obs.hooks.on_sweep = [&](const Mesh& mesh, const NodalField& u, const NodalField& v, const ModelParams& p) {
      ++sweeps;
      const double gu = gradient_norm(mesh, u);
      const double gf = gradient_norm(mesh, dirichlet_lift(mesh, u));
      const double gv = gradient_norm(mesh, v);
      const double bu = gf / p.kappa;
      const double bv = p.delta() * mesh.total_area() / p.rho();
      worst_u = std::max(worst_u, gu / bu);
      worst_v = std::max(worst_v, gv / bv);
      if (gu > bu || gv > bv) ++violations;
    };
    run_quasi_static(cfg, obs);
  }
  report(3, "a-priori-bounds", violations == 0 && sweeps > 0,
         fmt("sweeps=%zu violations=%zu max|grad u|/bound=%.3e max|grad v|/bound=%.3e", sweeps, violations,
             worst_u, worst_v));
}

// Unit square with Dirichlet data on x = 0 and x = 1, Neumann elsewhere.
Mesh square_with_side_dirichlet(int n) {
  const Mesh base = build_unit_square(n);
  BoundaryMap bnd;
  for (const Edge& e : base.edges()) {
    if (!e.on_boundary()) continue;
    const Vec2 a = base.vertex(e.v[0]), b = base.vertex(e.v[1]);
    BoundaryTag tag = BoundaryTag::neumann_outer;
    if (a.x == 0.0 && b.x == 0.0) tag = BoundaryTag::dirichlet_top_left;
    if (a.x == 1.0 && b.x == 1.0) tag = BoundaryTag::dirichlet_top_right;
    bnd[edge_key(e.v[0], e.v[1])] = tag;
  }
  return Mesh(base.vertices(), base.elements(), bnd);
}

// Probes on the refined mesh built from the residual of the coarse pair:
// psi solves K psi = w .* r_u (zero on Dirichlet vertices) and phi solves
// (K + M) phi = w' .* r_v, with random weights w, w' in [0, 1].  With unit
// weights they are the Riesz representers, so the sampled ratios approach
// the dual norm of the residual rather than a mesh-dependent fraction of it.
class RieszProbes {
 public:
  RieszProbes(const ProbeSpace& probe, const NodalField& u, const NodalField& v, const ModelParams& p)
      : fine_(probe.mesh()) {
    const NodalField uf = probe.transfer(u);
    const NodalField vf = probe.transfer(v);
    const std::size_t n = fine_.num_vertices();
    const auto& d = fine_.dirichlet_vertices();
    r_u_.assign(n, 0.0);
    r_v_.assign(n, 0.0);
    NodalField e = NodalField::constant(fine_, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = 1.0;
      if (!d[i]) r_u_[i] = dir_derivative_A(vf, uf, e, fine_, p, false);
      r_v_[i] = dir_derivative_B(uf, vf, e, fine_, p, false);
      e[i] = 0.0;
    }
    k_ = pattern_from_mesh(fine_);
    km_ = k_;
    for (int el = 0; el < static_cast<int>(fine_.num_elements()); ++el) {
      const Triangle& t = fine_.element(el);
      const ElementGeometry& g = fine_.geometry(el);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double kab = g.area * dot(g.grad_lambda[a], g.grad_lambda[b]);
          km_.add(t[a], t[b], kab + (a == b ? g.area / 3.0 : 0.0));
          if (d[t[a]] || d[t[b]]) continue;
          k_.add(t[a], t[b], kab);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i]) k_.add(static_cast<int>(i), static_cast<int>(i), 1.0);
    }
  }

  std::pair<NodalField, NodalField> draw(std::mt19937_64& rng, bool unit) const {
    std::uniform_real_distribution<double> w(0.0, 1.0);
    std::vector<double> bu(r_u_.size()), bv(r_v_.size());
    for (std::size_t i = 0; i < bu.size(); ++i) {
      bu[i] = (unit ? 1.0 : w(rng)) * r_u_[i];
      bv[i] = (unit ? 1.0 : w(rng)) * r_v_[i];
    }
    return {NodalField(fine_, solve(k_, bu)), NodalField(fine_, solve(km_, bv))};
  }

 private:
  static std::vector<double> solve(const CsrMatrix& a, const std::vector<double>& b) {
    double nb = 0.0;
    for (double x : b) nb = std::max(nb, std::abs(x));
    if (nb == 0.0) return std::vector<double>(b.size(), 0.0);
    return pcg(a, b, 1e-12);
  }

  const Mesh& fine_;
  std::vector<double> r_u_, r_v_;
  CsrMatrix k_, km_;
};

void criterion4(std::mt19937_64& rng) {
  ModelParams p;
  p.beta = 1.0;
  p.kappa = 1e-2;
  // delta below the peak driving force and side data below the flux peak, so
  // the critical point has 0 < v < 1 everywhere and no active box constraint
  p.epsilon = 10.0;
  const double load = 0.2;
  SolverOptions solver;
  solver.tol_lin = 1e-13;
  solver.tol_picard = 1e-11;
  solver.max_picard = 1000;
  solver.lumped = false;
  solver.inexact_picard = false;

  std::vector<double> max_ratio;
  bool finite = true;
  Mesh mesh = square_with_side_dirichlet(4);
  for (int level = 0; level < 3; ++level) {
    if (level > 0) mesh = refine_uniform(mesh).mesh;
    ConstraintSet bc;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
      if (!mesh.dirichlet_vertices()[i]) continue;
      const Vec2 x = mesh.vertex(static_cast<int>(i));
      bc.add(static_cast<int>(i), x.x < 0.5 ? -load : load * (1.0 + 0.15 * std::cos(M_PI * x.y)));
    }
    const CrackState crack = CrackState::empty(mesh);
    // start u from the linear-elastic solution so Picard stays on the branch
    // below the flux peak instead of localizing at the Dirichlet sides
    ModelParams linear = p;
    linear.beta = 0.0;
    const NodalField u0 = solve_u_picard(mesh, NodalField::constant(mesh, 1.0), bc, linear, solver.picard()).u;
    const auto alt = alternate_minimize(mesh, NodalField::constant(mesh, 1.0), &u0, bc, crack, p, 0.0, 1e-12, 500,
                                        solver);
    const ElementIndicators eta = compute_indicators(mesh, alt.u, alt.v, p);
    const ProbeSpace probe = make_probe_space(mesh, 1);
    const RieszProbes riesz(probe, alt.u, alt.v, p);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      // k = 0 is the exact representer, the others randomly reweight it
      const auto [psi, phi] = riesz.draw(rng, k == 0);
      const DualProbe r = residual_dual_probe(mesh, alt.u, alt.v, probe, psi, phi, p, eta);
      const double ratio = r.lhs / (r.rhs_tilde + r.rhs_hat);
      if (!std::isfinite(ratio)) finite = false;
      worst = std::max(worst, ratio);
    }
    max_ratio.push_back(worst);
  }
  const double hi = *std::max_element(max_ratio.begin(), max_ratio.end());
  const double lo = *std::min_element(max_ratio.begin(), max_ratio.end());
  const bool stable = finite && lo > 0.0 && hi / lo < 3.0;

  // Constant-gradient u and constant v with the v-residual balanced: every
  // indicator term vanishes.
  const Mesh zmesh = square_with_side_dirichlet(4);
  const double v0 = 0.5;
  const NodalField v = NodalField::constant(zmesh, v0);
  const NodalField one = NodalField::constant(zmesh, 1.0);
  auto linear_u = [&](double g) {
    std::vector<double> vals(zmesh.num_vertices());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = g * (zmesh.vertex(static_cast<int>(i)).x - 0.5);
    return NodalField(zmesh, std::move(vals));
  };
  auto balance = [&](double g) { return dir_derivative_B(linear_u(g), v, one, zmesh, p, false); };
  // B(phi = 1) = driving force - delta; it is negative at g = 0 and rises
  // until the strain-limited peak
  double a = 0.0, b = 0.1;
  while (balance(b) < 0.0 && b < 100.0) b *= 1.5;
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    (balance(m) < 0.0 ? a : b) = m;
  }
  const NodalField uz = linear_u(0.5 * (a + b));
  const ElementIndicators ez = compute_indicators(zmesh, uz, v, p);
  const ProbeSpace zprobe = make_probe_space(zmesh, 1);
  double max_lhs = 0.0;
  for (int k = 0; k < 100; ++k) {
    const NodalField psi = random_test_function(zprobe.mesh(), rng);
    const NodalField phi = random_field(zprobe.mesh(), rng, -1.0, 1.0);
    max_lhs = std::max(max_lhs, residual_dual_probe(zmesh, uz, v, zprobe, psi, phi, p, ez).lhs);
  }
  const bool zero_ok = max_lhs <= 1e-8;
  report(4, "residual-estimator-bound", stable && zero_ok,
         fmt("max_ratio=[%.3e %.3e %.3e] spread=%.2fx zero_case: eta=%.2e max|J'|=%.2e", max_ratio[0], max_ratio[1],
             max_ratio[2], hi / lo, ez.global_eta(), max_lhs));
}

void criterion5(std::mt19937_64& rng) {
  const auto t0 = Clock::now();
  ModelParams p;
  p.beta = 0.0;
  p.kappa = 1e-3;
  p.epsilon = 0.3;
  std::vector<Mesh> meshes = {build_unit_square_with_slit(4, 0.5), build_unit_square_with_slit(8, 0.5),
                              build_unit_square(15)};
  {
    Mesh m = build_unit_square_with_slit(4, 0.5);
    while (m.num_elements() < 700) {
      std::vector<int> marked;
      std::uniform_int_distribution<int> pick(0, static_cast<int>(m.num_elements()) - 1);
      for (int k = 0; k < 20; ++k) marked.push_back(pick(rng));
      std::sort(marked.begin(), marked.end());
      marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
      m = bisect(m, marked).mesh;
    }
    meshes.push_back(m);
  }
  double worst = 0.0;
  std::size_t max_elems = 0;
  for (const Mesh& m : meshes) {
    max_elems = std::max(max_elems, m.num_elements());
    const NodalField u = random_field(m, rng, -1.0, 1.0);
    const NodalField v = random_field(m, rng, 0.0, 1.0);
    worst = std::max(worst, indicator_deviation(compute_indicators(m, u, v, p), oracle_indicators(m, u, v, p)));
  }
  const double dt = seconds_since(t0);
  report(5, "estimator-oracle", worst <= 1e-10 && max_elems <= 1000 && dt < 30.0,
         fmt("meshes=%zu max_elements=%zu max_rel_dev=%.2e runtime=%.2fs", meshes.size(), max_elems, worst, dt));
}

void criterion6(std::mt19937_64& rng) {
  std::size_t mismatches = 0;
  for (int k = 0; k < 50; ++k) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<double> eta(static_cast<std::size_t>(n));
    for (auto& x : eta) {
      // a few repeated values so ties occur
      x = std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? 0.25 : std::uniform_real_distribution<double>(0, 1)(rng);
    }
    const double theta = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    if (dorfler_mark(eta, theta).size() != marking_oracle(eta, theta)) ++mismatches;
  }
  report(6, "marking-minimality", mismatches == 0, fmt("instances=50 mismatches=%zu", mismatches));
}

void criterion7(std::mt19937_64& rng) {
  Mesh m = build_unit_square_with_slit(4, 0.5);
  const double angle0 = min_angle(m);
  bool ok = true;
  std::size_t problems = 0;
  for (int round = 0; round < 10; ++round) {
    std::vector<int> marked;
    std::bernoulli_distribution take(0.2);
    for (int e = 0; e < static_cast<int>(m.num_elements()); ++e) {
      if (take(rng)) marked.push_back(e);
    }
    m = bisect(m, marked).mesh;
    const auto rep = check_conformity(m);
    problems += rep.problems.size();
    ok = ok && rep.conforming && min_angle(m) >= 0.5 * angle0;
  }
  report(7, "refinement-soundness", ok,
         fmt("rounds=10 elements=%zu conformity_problems=%zu min_angle=%.2fdeg initial=%.2fdeg", m.num_elements(),
             problems, min_angle(m) * 180.0 / M_PI, angle0 * 180.0 / M_PI));
}

void criterion8() {
  std::size_t transitions = 0, violations = 0;
  double surface_max = 0.0;
  for (int algorithm : {2, 3}) {
    for (double beta : {0.0, 0.05}) {
      SimulationConfig cfg = reference_config();
      cfg.model.beta = beta;
      cfg.algorithm = algorithm;
      cfg.n_initial = 8;
      cfg.steps = 4;
      cfg.dt = 0.25;
      cfg.load_rate = 2.0;
      cfg.adapt.max_refines = 4;
      cfg.adapt.max_outer = 6;
      cfg.adapt.max_elements = 20000;
      RunObserver obs;
      obs.on_step = [&](const EnergyRecord& rec, const StepResult& res, const DiscreteState&) {
        transitions += res.trace.size() > 0 ? res.trace.size() - 1 : 0;
        violations += monotonicity_violations(res.trace, 1e-8).size();
        surface_max = std::max(surface_max, rec.surface);
      };
      run_quasi_static(cfg, obs);
    }
  }
  report(8, "energy-monotonicity", violations == 0 && transitions > 0 && surface_max > 0.0,
         fmt("transitions=%zu violations=%zu max_surface=%.3e", transitions, violations, surface_max));
}

struct ReferenceRun {
  int steps = 0;
  double runtime = 0.0;
  std::string csv;
  std::string error;
  std::size_t box_violations = 0;
  std::size_t pin_violations = 0;
  std::size_t max_pinned = 0;
  std::vector<int> refines;
  std::vector<double> eta;
  std::vector<std::uint8_t> met;
  std::vector<double> surface;
  DiscreteState final_state;
};

ReferenceRun reference_run(int steps, const std::filesystem::path& csv_path) {
  SimulationConfig cfg = reference_config();
  cfg.steps = steps;
  ReferenceRun run;
  std::vector<int> pinned_ids;
  RunObserver obs;
  obs.on_step = [&](const EnergyRecord& rec, const StepResult& res, const DiscreteState& st) {
    for (double x : st.v.values) {
      if (!(x >= 0.0 && x <= 1.0)) ++run.box_violations;
    }
    // vertex ids survive bisection, so earlier pins keep their ids
    for (int id : pinned_ids) {
      if (st.v[static_cast<std::size_t>(id)] != 0.0) ++run.pin_violations;
    }
    pinned_ids.clear();
    for (std::size_t i = 0; i < st.crack.pinned.size(); ++i) {
      if (st.crack.pinned[i]) pinned_ids.push_back(static_cast<int>(i));
    }
    run.max_pinned = std::max(run.max_pinned, pinned_ids.size());
    run.refines.push_back(res.refines);
    run.eta.push_back(res.eta);
    run.met.push_back(res.tolerance_met ? 1 : 0);
    run.surface.push_back(rec.surface);
    std::fprintf(stderr, "  reference step %d nelem=%zu refines=%d eta=%.3e surface=%.6e\n", rec.step, rec.nelem,
                 res.refines, res.eta, rec.surface);
  };
  const auto t0 = Clock::now();
  try {
    SimulationResult res = run_quasi_static(cfg, obs);
    run.steps = static_cast<int>(res.records.size());
    write_energy_csv(res.records, csv_path.string());
    std::ifstream in(csv_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    run.csv = ss.str();
    run.final_state = std::move(res.final_state);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.runtime = seconds_since(t0);
  return run;
}

// Components of the {v < 0.1} vertex set connected through mesh edges.
struct CrackPath {
  bool from_tip = false;
  bool reaches_bottom = false;
  std::vector<Vec2> points;
};

CrackPath find_crack_path(const Mesh& mesh, const NodalField& v, Vec2 tip) {
  const std::size_t n = mesh.num_vertices();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : mesh.edges()) {
    if (v[e.v[0]] < 0.1 && v[e.v[1]] < 0.1) {
      adj[e.v[0]].push_back(e.v[1]);
      adj[e.v[1]].push_back(e.v[0]);
    }
  }
  const double h = mesh.max_diameter();
  CrackPath best;
  int label = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0 || !(v[s] < 0.1)) continue;
    CrackPath cur;
    std::vector<int> stack{static_cast<int>(s)};
    comp[s] = label;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      const Vec2 x = mesh.vertex(a);
      cur.points.push_back(x);
      if (norm(x - tip) <= h) cur.from_tip = true;
      if (x.y <= 1e-12) cur.reaches_bottom = true;
      for (int b : adj[static_cast<std::size_t>(a)]) {
        if (comp[static_cast<std::size_t>(b)] < 0) {
          comp[static_cast<std::size_t>(b)] = label;
          stack.push_back(b);
        }
      }
    }
    ++label;
    if (cur.from_tip && (!best.from_tip || cur.points.size() > best.points.size())) best = std::move(cur);
  }
  return best;
}

void reference_criteria(int steps, bool determinism) {
  const auto dir = std::filesystem::temp_directory_path() / "slfrac_acceptance";
  std::filesystem::create_directories(dir);
  std::fprintf(stderr, "reference run 1 (%d steps)\n", steps);
  const ReferenceRun r1 = reference_run(steps, dir / "energy_1.csv");
  const bool full = steps == 60 && r1.error.empty() && r1.steps == 60;
  const std::string scope = full ? "" : fmt(" [truncated run: %d of 60 steps%s%s]", r1.steps,
                                            r1.error.empty() ? "" : ", error: ", r1.error.c_str());

  report(2, "box-constraint", full && r1.box_violations == 0 && r1.pin_violations == 0,
         fmt("box_violations=%zu pin_violations=%zu max_pinned=%zu", r1.box_violations, r1.pin_violations,
             r1.max_pinned) + scope);

  int failed_steps = 0, first_failed = 0;
  double worst_eta = 0.0;
  for (std::size_t j = 0; j < r1.met.size(); ++j) {
    worst_eta = std::max(worst_eta, r1.eta[j]);
    if (!r1.met[j] || r1.refines[j] > 15) {
      ++failed_steps;
      if (first_failed == 0) first_failed = static_cast<int>(j) + 1;
    }
  }
  report(9, "algorithm1-termination", full && failed_steps == 0,
         fmt("steps_failing=%d first_failing_step=%d max_final_eta=%.3e tolerance=1e-2", failed_steps, first_failed,
             worst_eta) + scope);

  bool monotone = true;
  for (std::size_t j = 1; j < r1.surface.size(); ++j) {
    if (r1.surface[j] < r1.surface[j - 1] - 1e-10) monotone = false;
  }
  std::string crack_detail = "no final state";
  bool path_ok = false, band_ok = false;
  if (r1.error.empty()) {
    const DiscreteState& st = r1.final_state;
    const CrackPath path = find_crack_path(st.mesh, st.v, {0.5, 0.5});
    path_ok = path.from_tip && path.reaches_bottom;
    std::size_t near = 0;
    if (!path.points.empty()) {
      for (int e = 0; e < static_cast<int>(st.mesh.num_elements()); ++e) {
        const Triangle& t = st.mesh.element(e);
        const Vec2 c = (1.0 / 3.0) * (st.mesh.vertex(t[0]) + st.mesh.vertex(t[1]) + st.mesh.vertex(t[2]));
        double d = 1e300;
        for (const Vec2& x : path.points) d = std::min(d, norm(c - x));
        if (d <= 0.1) ++near;
      }
    }
    const double frac = static_cast<double>(near) / static_cast<double>(st.mesh.num_elements());
    band_ok = frac >= 0.5;
    double vmin = 1.0;
    for (double x : st.v.values) vmin = std::min(vmin, x);
    crack_detail = fmt("min_v=%.4f path_vertices=%zu tip_to_bottom=%d band_fraction=%.3f", vmin, path.points.size(),
                       path_ok ? 1 : 0, frac);
  }
  const bool fast = r1.runtime < 600.0;
  report(10, "reference-reproduction", full && path_ok && monotone && band_ok && fast,
         fmt("(a)%s (b)%s (c)%s runtime=%.1fs(%s) ", path_ok ? "ok" : "no", monotone ? "ok" : "no",
             band_ok ? "ok" : "no", r1.runtime, fast ? "ok" : "no") + crack_detail + scope);

  if (!determinism) {
    report(11, "determinism", false, "skipped second run" + scope);
    return;
  }
  std::fprintf(stderr, "reference run 2 (%d steps)\n", steps);
  const ReferenceRun r2 = reference_run(steps, dir / "energy_2.csv");
  const bool same = r1.error.empty() && r2.error.empty() && r1.csv == r2.csv && !r1.csv.empty();
  report(11, "determinism", full && same,
         fmt("energy_csv_bytes=%zu identical=%d", r1.csv.size(), same ? 1 : 0) + scope);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int reference_steps = 60;
  std::uint64_t seed = 20240611;
  bool strict = false;
  bool skip_second = false;
  app.add_option("--reference-steps", reference_steps, "time steps of the reference runs (60 for the full criterion)")
      ->check(CLI::Range(1, 60));
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--strict", strict, "exit nonzero when a criterion fails");
  app.add_flag("--single-reference-run", skip_second, "skip the second reference run");
  std::vector<int> only;
  app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  const auto t0 = Clock::now();
  try {
    auto wanted = [&](std::initializer_list<int> ids) {
      if (only.empty()) return true;
      for (int id : ids) {
        if (std::find(only.begin(), only.end(), id) != only.end()) return true;
      }
      return false;
    };
    if (wanted({1})) criterion1(rng);
    if (wanted({3})) criterion3();
    if (wanted({4})) criterion4(rng);
    if (wanted({5})) criterion5(rng);
    if (wanted({6})) criterion6(rng);
    if (wanted({7})) criterion7(rng);
    if (wanted({8})) criterion8();
    if (wanted({2, 9, 10, 11})) reference_criteria(reference_steps, !skip_second);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::sort(g_lines.begin(), g_lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int passed = 0;
  std::printf("\nsummary (%.1fs)\n", seconds_since(t0));
  for (const Line& l : g_lines) {
    std::printf("  %2d %-26s %s\n", l.id, l.name.c_str(), l.pass ? "PASS" : "FAIL");
    passed += l.pass ? 1 : 0;
  }
  std::printf("%d of %zu criteria passed\n", passed, g_lines.size());
  return strict && passed != static_cast<int>(g_lines.size()) ? 1 : 0;
}
