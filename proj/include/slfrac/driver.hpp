#pragma once

#include <functional>
#include <string>
#include <vector>

#include "slfrac/adaptivity.hpp"

namespace slfrac {

enum class EpsilonMode { fixed, mesh_scaled };

struct SimulationConfig {
  ModelParams model;                 // epsilon is derived from the mesh
  EpsilonMode epsilon_mode = EpsilonMode::fixed;
  double epsilon_multiplier = 10.0;
  AdaptivityConfig adapt;
  int algorithm = 1;
  int steps = 60;
  double dt = 0.01;
  double load_rate = 1.0;
  int n_initial = 16;
  double slit_tip_y = 0.5;
  SolverOptions solver;
  double c_irr = 1e-2;
  std::string out_dir = "out";
  int out_stride = 1;

  void validate() const;
};

struct EnergyRecord {
  int step = 0;
  double time = 0.0;
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
  std::size_t ndof = 0;
  std::size_t nelem = 0;
  int nrefines = 0;
  int sweeps = 0;
};

/// Top-edge displacement: -c t left of the slit, +c t right of it.  Throws
/// InvalidInput off the top edge and at the slit mouth x = 0.5, where the
/// side must be given explicitly.
double boundary_load(double t, Vec2 x, double c);
double boundary_load(double t, BoundaryTag side, double c);

/// Dirichlet data for u at time t on every Dirichlet vertex of the mesh.
ConstraintSet u_boundary_constraints(const Mesh& mesh, double t, double c);

/// multiplier * smallest element diameter.
double select_epsilon(const Mesh& mesh, EpsilonMode mode, double multiplier);

struct RunObserver {
  Hooks hooks;
  /// Called after each completed step with its algorithm result (final
  /// state after the crack update).
  std::function<void(const EnergyRecord&, const StepResult&, const DiscreteState&)> on_step;
};

struct SimulationResult {
  std::vector<EnergyRecord> records;
  DiscreteState final_state;
  ModelParams params;
  std::vector<IterationRow> log;
};

/// Quasi-static time stepping on the slit domain.
SimulationResult run_quasi_static(const SimulationConfig& cfg, const RunObserver& observer = {});

}  // namespace slfrac
