#include "slfrac/driver.hpp"

#include <cmath>

#include "slfrac/error.hpp"

namespace slfrac {

void SimulationConfig::validate() const {
  ModelParams probe = model;
  probe.epsilon = 1.0;
  probe.validate();
  adapt.validate();
  if (!(epsilon_multiplier > 0.0)) throw InvalidInput("config: epsilon multiplier must be positive");
  if (algorithm < 1 || algorithm > 3) throw InvalidInput("config: algorithm must be 1, 2 or 3");
  if (steps < 1) throw InvalidInput("config: steps must be at least 1");
  if (!(dt > 0.0)) throw InvalidInput("config: dt must be positive");
  if (!std::isfinite(load_rate)) throw InvalidInput("config: load rate must be finite");
  if (n_initial < 2 || n_initial % 2 != 0) throw InvalidInput("config: n_initial must be even and >= 2");
  if (!(slit_tip_y > 0.0 && slit_tip_y < 1.0)) throw InvalidInput("config: slit_tip_y must lie in (0,1)");
  if (!(solver.tol_lin > 0.0 && solver.tol_picard > 0.0) || solver.max_picard < 1) {
    throw InvalidInput("config: solver tolerances must be positive");
  }
  if (!(c_irr > 0.0)) throw InvalidInput("config: c_irr must be positive");
  if (out_stride < 1) throw InvalidInput("config: out.stride must be at least 1");
}

double boundary_load(double t, BoundaryTag side, double c) {
  if (side == BoundaryTag::dirichlet_top_left) return -c * t;
  if (side == BoundaryTag::dirichlet_top_right) return c * t;
  throw InvalidInput("boundary_load: not a Dirichlet side");
}

double boundary_load(double t, Vec2 x, double c) {
  if (std::abs(x.y - 1.0) > 1e-12 || x.x < 0.0 || x.x > 1.0) throw InvalidInput("boundary_load: point is not on the top edge");
  if (x.x == 0.5) throw InvalidInput("boundary_load: the slit mouth needs an explicit side");
  return boundary_load(t, x.x < 0.5 ? BoundaryTag::dirichlet_top_left : BoundaryTag::dirichlet_top_right, c);
}

ConstraintSet u_boundary_constraints(const Mesh& mesh, double t, double c) {
  ConstraintSet bc;
  const auto& flags = mesh.dirichlet_vertices();
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) bc.add(static_cast<int>(i), boundary_load(t, mesh.dirichlet_side(static_cast<int>(i)), c));
  }
  return bc;
}

double select_epsilon(const Mesh& mesh, EpsilonMode, double multiplier) {
  // both modes start from the current mesh; mesh_scaled mode is re-applied
  // by the adaptive loops after every refinement
  return multiplier * mesh.min_diameter();
}

SimulationResult run_quasi_static(const SimulationConfig& cfg, const RunObserver& observer) {
  cfg.validate();
  Mesh mesh = build_unit_square_with_slit(cfg.n_initial, cfg.slit_tip_y);
  ModelParams params = cfg.model;
  params.epsilon = select_epsilon(mesh, cfg.epsilon_mode, cfg.epsilon_multiplier);
  params.validate();
  AdaptivityConfig adapt = cfg.adapt;
  adapt.epsilon_mesh_scaled = cfg.epsilon_mode == EpsilonMode::mesh_scaled;
  adapt.epsilon_multiplier = cfg.epsilon_multiplier;

  DiscreteState state;
  state.u = NodalField::constant(mesh, 0.0);
  state.v = NodalField::constant(mesh, 1.0);
  state.crack = CrackState::empty(mesh);
  state.mesh = std::move(mesh);

  SolverOptions solver = cfg.solver;
  solver.allow_picard_stall = !cfg.adapt.strict;

  SimulationResult out;
  for (int j = 1; j <= cfg.steps; ++j) {
    const double t = j * cfg.dt;
    StepProblem problem;
    problem.u_bc = [t, c = cfg.load_rate](const Mesh& m) { return u_boundary_constraints(m, t, c); };
    problem.params = params;
    problem.step = j;
    problem.time = t;
    StepResult res;
    try {
      switch (cfg.algorithm) {
        case 1: res = run_algorithm1(std::move(state), problem, adapt, solver, observer.hooks); break;
        case 2: res = run_algorithm2(std::move(state), problem, adapt, solver, observer.hooks); break;
        default: res = run_algorithm3(std::move(state), problem, adapt, solver, observer.hooks); break;
      }
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("step " + std::to_string(j) + ": " + e.what(), e.history());
    } catch (const Error& e) {
      throw Error("step " + std::to_string(j) + ": " + e.what());
    }
    state = res.state;
    params = res.params;
    state.crack = update_crack_state(state.mesh, state.v, state.crack, cfg.c_irr, adapt.xi_cr);

    EnergyRecord rec;
    rec.step = j;
    rec.time = t;
    rec.bulk = res.energy.bulk;
    rec.surface = res.energy.surface;
    rec.total = res.energy.total;
    rec.ndof = state.mesh.num_vertices();
    rec.nelem = state.mesh.num_elements();
    rec.nrefines = res.refines;
    rec.sweeps = res.sweeps;
    out.records.push_back(rec);
    out.log.insert(out.log.end(), res.log.begin(), res.log.end());
    if (observer.on_step) observer.on_step(rec, res, state);
  }
  out.final_state = std::move(state);
  out.params = params;
  return out;
}

}  // namespace slfrac
