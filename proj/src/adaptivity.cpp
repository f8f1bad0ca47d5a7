#include "slfrac/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slfrac/error.hpp"

namespace slfrac {

void AdaptivityConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidInput("adaptivity: theta must lie in (0,1]");
  if (!(xi_rf > 0.0 && xi_v > 0.0 && xi_vn > 0.0 && xi_cr > 0.0)) throw InvalidInput("adaptivity: tolerances must be positive");
  if (!(rf_decay > 0.0 && rf_decay <= 1.0)) throw InvalidInput("adaptivity: rf_decay must lie in (0,1]");
  if (max_refines < 0 || max_sweeps < 1 || max_outer < 1) throw InvalidInput("adaptivity: iteration caps must be positive");
  if (!(epsilon_multiplier > 0.0)) throw InvalidInput("adaptivity: epsilon multiplier must be positive");
}

std::vector<int> dorfler_mark(std::span<const double> eta_sq, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidInput("dorfler_mark: theta must lie in (0,1]");
  double total = 0.0;
  for (double x : eta_sq) {
    if (!(x >= 0.0)) throw InvalidInput("dorfler_mark: indicators must be nonnegative");
    total += x;
  }
  std::vector<int> order(eta_sq.size());
  std::iota(order.begin(), order.end(), 0);
  if (total == 0.0) return {};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return eta_sq[static_cast<std::size_t>(a)] > eta_sq[static_cast<std::size_t>(b)];
  });
  const double target = theta * total;
  double acc = 0.0;
  std::vector<int> marked;
  for (int e : order) {
    marked.push_back(e);
    acc += eta_sq[static_cast<std::size_t>(e)];
    if (acc >= target) break;
  }
  return marked;
}

std::vector<int> dorfler_mark(const ElementIndicators& indicators, double theta) {
  return dorfler_mark(std::span<const double>(indicators.eta_sq), theta);
}

std::vector<double> rf_schedule(double xi_rf, double decay, int count) {
  std::vector<double> s;
  double x = xi_rf;
  for (int k = 0; k < count; ++k) {
    s.push_back(x);
    x *= decay;
  }
  return s;
}

std::vector<std::size_t> monotonicity_violations(const std::vector<EnergyState>& trace, double rel_tol) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double prev = trace[i - 1].total;
    if (trace[i].total > prev + rel_tol * std::abs(prev)) bad.push_back(i);
  }
  return bad;
}

namespace {

double max_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

NodalField with_constraints(const Mesh& mesh, const NodalField* u, const ConstraintSet& bc) {
  NodalField out = u && u->mesh_id == mesh.id() ? *u : NodalField::constant(mesh, 0.0);
  for (const auto& [i, value] : bc.values()) out[static_cast<std::size_t>(i)] = value;
  return out;
}

// One v-update: box-constrained solve of the lagged v-system, then clamping.
// Skipped when u vanishes and nothing holds v (the system would be singular
// and v is then left unchanged).
NodalField v_step(const Mesh& mesh, const NodalField& u, const NodalField& v, const CrackState& crack,
                  const ModelParams& p, double xi_v, const SolverOptions& solver) {
  const ConstraintSet cons = crack.v_constraints();
  if (cons.empty() && max_abs(u.values) == 0.0) return v;
  const SparseSystem sys = assemble_v_system(mesh, u, v, cons, p, solver.lumped);
  NodalField next(mesh, solve_sparse_box(sys, 0.0, 1.0, solver.tol_lin));
  return clamp_v(next, xi_v);
}

DiscreteState refine_state(const DiscreteState& s, std::span<const int> marked, RefinementResult& r) {
  r = bisect(s.mesh, marked);
  DiscreteState out;
  out.mesh = r.mesh;
  out.u = NodalField(out.mesh, prolongate(s.u.values, r));
  out.v = NodalField(out.mesh, prolongate(s.v.values, r));
  out.crack = transfer_crack_state(s.crack, r);
  return out;
}

void rescale_epsilon(ModelParams& p, const Mesh& mesh, const AdaptivityConfig& cfg) {
  if (cfg.epsilon_mesh_scaled) p.epsilon = cfg.epsilon_multiplier * mesh.min_diameter();
}

IterationRow make_row(const StepProblem& problem, int outer, int sweep, int round, const char* phase,
                      const DiscreteState& s, const ElementIndicators* eta, double tol, const EnergySplit& en) {
  IterationRow row;
  row.step = problem.step;
  row.outer = outer;
  row.sweep = sweep;
  row.refine_round = round;
  row.phase = phase;
  row.ndof = s.mesh.num_vertices();
  row.nelem = s.mesh.num_elements();
  if (eta) {
    row.eta_tilde = eta->global_eta_tilde();
    row.eta_hat = eta->global_eta_hat();
    row.eta = eta->global_eta();
  }
  row.tolerance = tol;
  row.bulk = en.bulk;
  row.surface = en.surface;
  row.total = en.total;
  return row;
}

bool can_refine(const DiscreteState& s, int rounds, const AdaptivityConfig& cfg) {
  return rounds < cfg.max_refines && s.mesh.num_elements() < cfg.max_elements;
}

}  // namespace

AlternationResult alternate_minimize(const Mesh& mesh, const NodalField& v_init, const NodalField* u_init,
                                     const ConstraintSet& u_bc, const CrackState& crack, const ModelParams& p,
                                     double xi_v, double tol, int max_sweeps, const SolverOptions& solver,
                                     const Hooks& hooks) {
  require_bound(v_init, mesh, "alternate_minimize");
  if (crack.mesh_id != mesh.id()) throw MeshMismatch("alternate_minimize: crack state belongs to another mesh");
  AlternationResult res;
  res.v = v_init;
  const ConstraintSet v_cons = crack.v_constraints();
  for (const auto& [i, value] : v_cons.values()) res.v[static_cast<std::size_t>(i)] = value;
  res.u = with_constraints(mesh, u_init, u_bc);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    PicardResult pic = solve_u_picard(mesh, res.v, u_bc, p, solver.picard(), &res.u);
    res.picard_iterations += pic.iterations;
    if (!pic.converged) ++res.picard_stalls;
    res.u = std::move(pic.u);
    NodalField next = v_step(mesh, res.u, res.v, crack, p, xi_v, solver);
    const double inc = max_abs_diff(next.values, res.v.values);
    res.v = std::move(next);
    res.sweeps = sweep;
    res.increments.push_back(inc);
    if (hooks.on_sweep) hooks.on_sweep(mesh, res.u, res.v, p);
    if (inc < tol) return res;
  }
  throw ConvergenceError("alternate_minimize: sweep cap reached", res.increments);
}

StepResult run_algorithm1(DiscreteState state, const StepProblem& problem, const AdaptivityConfig& cfg,
                          const SolverOptions& solver, const Hooks& hooks) {
  StepResult res;
  res.params = problem.params;
  for (int round = 0;; ++round) {
    const ConstraintSet bc = problem.u_bc(state.mesh);
    AlternationResult alt = alternate_minimize(state.mesh, state.v, &state.u, bc, state.crack, res.params, cfg.xi_v,
                                               cfg.xi_vn, cfg.max_sweeps, solver, hooks);
    state.u = std::move(alt.u);
    state.v = std::move(alt.v);
    res.sweeps += alt.sweeps;
    res.picard_stalls += alt.picard_stalls;
    IndicatorOptions opt{state.crack.crack_edges(state.mesh)};
    const ElementIndicators eta = compute_indicators(state.mesh, state.u, state.v, res.params, opt);
    const double global = eta.global_eta();
    res.eta = global;
    res.eta_history.push_back(global);
    const EnergySplit en = total_energy(state.u, state.v, state.mesh, res.params, solver.lumped);
    res.log.push_back(make_row(problem, 1, alt.sweeps, round, "alt", state, &eta, cfg.xi_rf, en));
    res.trace.push_back({"alt", 1, state.mesh.num_elements(), en.total});
    if (global <= cfg.xi_rf) {
      res.tolerance_met = true;
      break;
    }
    if (!can_refine(state, round, cfg)) {
      if (cfg.strict) throw ConvergenceError("run_algorithm1: refinement cap reached", res.eta_history);
      break;
    }
    RefinementResult r;
    state = refine_state(state, dorfler_mark(eta, cfg.theta), r);
    rescale_epsilon(res.params, state.mesh, cfg);
    ++res.refines;
  }
  res.loop_success.push_back(res.tolerance_met);
  res.loop_eta.push_back(res.eta);
  res.loop_tolerance.push_back(cfg.xi_rf);
  res.xi_schedule.push_back(cfg.xi_rf);
  res.outer = 1;
  res.energy = total_energy(state.u, state.v, state.mesh, res.params, solver.lumped);
  res.state = std::move(state);
  return res;
}

namespace {

enum class Phase { u, v };

// Runs the inner refinement loop of Algorithms 2/3 for one phase: estimate at
// the current pair, refine while above `tol`, re-solving the phase's field on
// every new mesh.
void phase_loop(Phase phase, DiscreteState& state, NodalField& v_start, StepResult& res, const StepProblem& problem,
                const AdaptivityConfig& cfg, const SolverOptions& solver, int outer, double tol) {
  const char* label = phase == Phase::u ? "u" : "v";
  auto solve = [&] {
    if (phase == Phase::u) {
      const ConstraintSet bc = problem.u_bc(state.mesh);
      PicardResult pic = solve_u_picard(state.mesh, state.v, bc, res.params, solver.picard(), &state.u);
      if (!pic.converged) ++res.picard_stalls;
      state.u = std::move(pic.u);
    } else {
      state.v = v_step(state.mesh, state.u, state.v, state.crack, res.params, cfg.xi_v, solver);
    }
    const EnergySplit en = total_energy(state.u, state.v, state.mesh, res.params, solver.lumped);
    res.trace.push_back({label, outer, state.mesh.num_elements(), en.total});
    return en;
  };

  EnergySplit en = solve();
  for (int round = 0;; ++round) {
    IndicatorOptions opt{state.crack.crack_edges(state.mesh)};
    const ElementIndicators eta = compute_indicators(state.mesh, state.u, state.v, res.params, opt);
    const double global = eta.global_eta();
    res.eta = global;
    res.eta_history.push_back(global);
    res.log.push_back(make_row(problem, outer, 0, round, label, state, &eta, tol, en));
    if (global <= tol) {
      res.loop_success.push_back(1);
      break;
    }
    if (!can_refine(state, round, cfg)) {
      if (cfg.strict) throw ConvergenceError("adaptive loop: refinement cap reached", res.eta_history);
      res.loop_success.push_back(0);
      break;
    }
    RefinementResult r;
    state = refine_state(state, dorfler_mark(eta, cfg.theta), r);
    v_start = NodalField(state.mesh, prolongate(v_start.values, r));
    rescale_epsilon(res.params, state.mesh, cfg);
    ++res.refines;
    const EnergySplit moved = total_energy(state.u, state.v, state.mesh, res.params, solver.lumped);
    res.trace.push_back({"refine", outer, state.mesh.num_elements(), moved.total});
    en = solve();
  }
  res.loop_eta.push_back(res.eta);
  res.loop_tolerance.push_back(tol);
}

StepResult run_interleaved(DiscreteState state, const StepProblem& problem, const AdaptivityConfig& cfg,
                           const SolverOptions& solver, const Hooks& hooks, double decay, int max_outer, bool cap_is_error) {
  StepResult res;
  res.params = problem.params;
  const ConstraintSet bc0 = problem.u_bc(state.mesh);
  state.u = with_constraints(state.mesh, &state.u, bc0);
  const ConstraintSet v_cons = state.crack.v_constraints();
  for (const auto& [i, value] : v_cons.values()) state.v[static_cast<std::size_t>(i)] = value;
  res.trace.push_back({"start", 0, state.mesh.num_elements(),
                       total_energy(state.u, state.v, state.mesh, res.params, solver.lumped).total});
  double xi = cfg.xi_rf;
  for (int outer = 1;; ++outer) {
    res.xi_schedule.push_back(xi);
    NodalField v_start = state.v;
    const double tol = xi / std::sqrt(2.0);
    phase_loop(Phase::u, state, v_start, res, problem, cfg, solver, outer, tol);
    phase_loop(Phase::v, state, v_start, res, problem, cfg, solver, outer, tol);
    ++res.sweeps;
    res.outer = outer;
    if (hooks.on_sweep) hooks.on_sweep(state.mesh, state.u, state.v, res.params);
    const double inc = max_abs_diff(state.v.values, v_start.values);
    if (inc < cfg.xi_v) break;
    if (outer >= max_outer) {
      if (cap_is_error) throw ConvergenceError("run_algorithm2: outer iteration cap reached", res.eta_history);
      break;
    }
    xi *= decay;
  }
  res.tolerance_met = !res.loop_success.empty() && res.loop_success.back() && res.loop_success[res.loop_success.size() - 2];
  res.energy = total_energy(state.u, state.v, state.mesh, res.params, solver.lumped);
  res.state = std::move(state);
  return res;
}

}  // namespace

StepResult run_algorithm2(DiscreteState state, const StepProblem& problem, const AdaptivityConfig& cfg,
                          const SolverOptions& solver, const Hooks& hooks) {
  return run_interleaved(std::move(state), problem, cfg, solver, hooks, 1.0, cfg.max_sweeps, true);
}

StepResult run_algorithm3(DiscreteState state, const StepProblem& problem, const AdaptivityConfig& cfg,
                          const SolverOptions& solver, const Hooks& hooks) {
  return run_interleaved(std::move(state), problem, cfg, solver, hooks, cfg.rf_decay, cfg.max_outer, false);
}

}  // namespace slfrac
