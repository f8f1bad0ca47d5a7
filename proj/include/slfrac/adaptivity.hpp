#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "slfrac/assembly.hpp"
#include "slfrac/crack.hpp"
#include "slfrac/estimator.hpp"

namespace slfrac {

struct AdaptivityConfig {
  double theta = 0.5;
  double xi_rf = 0.01;
  double xi_v = 1e-4;
  double xi_vn = 1e-6;
  double xi_cr = 1e-4;
  int max_refines = 15;        // refinement rounds per loop
  int max_sweeps = 200;        // alternating sweeps, and Algorithm-2 outer iterations
  int max_outer = 30;          // Algorithm-3 outer iterations
  double rf_decay = 0.5;       // Algorithm-3 tolerance schedule
  std::size_t max_elements = 200000;
  bool strict = false;         // throw instead of stopping when a refinement loop fails
  bool epsilon_mesh_scaled = false;
  double epsilon_multiplier = 10.0;

  void validate() const;
};

struct SolverOptions {
  double tol_lin = 1e-10;
  double tol_picard = 1e-8;
  int max_picard = 200;
  bool lumped = true;
  bool inexact_picard = true;
  /// Continue with the last (energy-decreasing) Picard iterate at the cap.
  bool allow_picard_stall = false;

  PicardOptions picard() const {
    return {tol_picard, max_picard, tol_lin, lumped, inexact_picard, allow_picard_stall};
  }
};

/// Smallest set whose squared indicators sum to at least theta times the
/// total; ties prefer lower indices.  Empty when all indicators vanish.
std::vector<int> dorfler_mark(std::span<const double> eta_sq, double theta);
std::vector<int> dorfler_mark(const ElementIndicators& indicators, double theta);

/// Problem data for one load step.
struct StepProblem {
  /// Dirichlet data for u on a given mesh.
  std::function<ConstraintSet(const Mesh&)> u_bc;
  ModelParams params;
  int step = 0;
  double time = 0.0;
};

/// Evolving discrete state: mesh, fields and crack bookkeeping, all bound to
/// the same mesh.
struct DiscreteState {
  Mesh mesh;
  NodalField u;
  NodalField v;
  CrackState crack;
};

/// One row of the iteration log.
struct IterationRow {
  int step = 0;
  int outer = 0;
  int sweep = 0;
  int refine_round = 0;
  std::string phase;
  std::size_t ndof = 0;
  std::size_t nelem = 0;
  double eta_tilde = 0.0;
  double eta_hat = 0.0;
  double eta = 0.0;
  double tolerance = 0.0;
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
};

/// Energy of an intermediate state, in the order the algorithm visits them.
struct EnergyState {
  std::string label;           // "u", "v", "refine"
  int outer = 0;
  std::size_t nelem = 0;
  double total = 0.0;
};

struct Hooks {
  /// Called after every alternating sweep (u and v updated).
  std::function<void(const Mesh&, const NodalField& u, const NodalField& v, const ModelParams&)> on_sweep;
};

struct AlternationResult {
  NodalField u;
  NodalField v;
  int sweeps = 0;
  int picard_iterations = 0;
  int picard_stalls = 0;
  std::vector<double> increments;   // ||v_n - v_{n-1}||_inf per sweep
};

/// Alternating minimization on a fixed mesh.  v is held at zero on the crack
/// vertices of `crack`.  The v-subproblem is solved on the box [0, 1] and then
/// clamped with xi_v.  Stops when the v increment drops below `tol`.
AlternationResult alternate_minimize(const Mesh& mesh, const NodalField& v_init, const NodalField* u_init,
                                     const ConstraintSet& u_bc, const CrackState& crack, const ModelParams& p,
                                     double xi_v, double tol, int max_sweeps, const SolverOptions& solver,
                                     const Hooks& hooks = {});

struct StepResult {
  DiscreteState state;
  ModelParams params;           // epsilon may change in mesh-scaled mode
  EnergySplit energy;
  int refines = 0;
  int sweeps = 0;
  int outer = 0;
  int picard_stalls = 0;        // u-solves that hit the Picard cap
  double eta = 0.0;
  bool tolerance_met = false;
  std::vector<double> eta_history;          // global eta after each estimate
  std::vector<double> xi_schedule;          // active tolerance per outer iteration
  std::vector<std::uint8_t> loop_success;   // per refinement loop: tolerance reached
  std::vector<double> loop_eta;             // per refinement loop: final eta
  std::vector<double> loop_tolerance;       // per refinement loop: tolerance used
  std::vector<EnergyState> trace;
  std::vector<IterationRow> log;
};

StepResult run_algorithm1(DiscreteState state, const StepProblem& problem, const AdaptivityConfig& cfg,
                          const SolverOptions& solver, const Hooks& hooks = {});
StepResult run_algorithm2(DiscreteState state, const StepProblem& problem, const AdaptivityConfig& cfg,
                          const SolverOptions& solver, const Hooks& hooks = {});
StepResult run_algorithm3(DiscreteState state, const StepProblem& problem, const AdaptivityConfig& cfg,
                          const SolverOptions& solver, const Hooks& hooks = {});

/// Xi_RF * decay^k for k = 0 .. count-1.
std::vector<double> rf_schedule(double xi_rf, double decay, int count);

/// Relative violations of the energy trace: entries where a state has
/// higher energy than its predecessor by more than rel_tol * |predecessor|.
std::vector<std::size_t> monotonicity_violations(const std::vector<EnergyState>& trace, double rel_tol);

}  // namespace slfrac
