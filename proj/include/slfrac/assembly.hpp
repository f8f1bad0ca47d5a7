#pragma once

#include <map>
#include <vector>

#include "slfrac/model.hpp"
#include "slfrac/sparse.hpp"

namespace slfrac {

/// Prescribed vertex values.
class ConstraintSet {
 public:
  /// Throws InvalidInput when the vertex is already constrained to a
  /// different value.
  void add(int vertex, double value);
  bool contains(int vertex) const { return values_.count(vertex) != 0; }
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  const std::map<int, double>& values() const { return values_; }
  /// Per-vertex 0/1 mask of constrained vertices.
  std::vector<std::uint8_t> mask(std::size_t num_vertices) const;

 private:
  std::map<int, double> values_;
};

struct SparseSystem {
  CsrMatrix matrix;              // constrained rows/columns replaced by identity
  std::vector<double> rhs;
  ConstraintSet constrained;
  CsrMatrix raw_matrix;          // before elimination
  std::vector<double> raw_rhs;
};

/// Symmetric elimination of `cons` from (raw_matrix, raw_rhs) into
/// (matrix, rhs).
void apply_constraints(SparseSystem& sys);

/// Frozen-coefficient system int a(v, u_lag) grad u . grad psi = 0 with the
/// Dirichlet data of `bc`.  Throws SingularSystem for an empty `bc`.
SparseSystem assemble_u_system(const Mesh& mesh, const NodalField& v, const NodalField& u_lag,
                               const ConstraintSet& bc, const ModelParams& p, bool lumped = true);

struct PicardResult {
  NodalField u;
  int iterations = 0;
  std::vector<double> history;   // max-norm increments
  bool converged = true;
};

struct PicardOptions {
  double tol_picard = 1e-8;
  int max_iter = 200;
  double tol_lin = 1e-10;
  bool lumped = true;
  /// Inner CG tolerance tied to the current increment, down to tol_lin.
  bool inexact = true;
  /// Return the last iterate with converged = false instead of throwing.
  bool allow_stall = false;
};

/// Picard iteration for u at fixed v.  Starts from `u0` (constraint values
/// imposed) or from zero.  Every iteration solves the frozen-coefficient
/// system with warm-started CG, which never raises the energy.  The
/// relaxation factor starts at 1 and is halved whenever the increment grows;
/// a relaxed step is only taken when its energy is below the undamped one.
/// Convergence is only declared after an inner solve at tol_lin.  Throws
/// ConvergenceError with the increment history after max_iter iterations
/// unless allow_stall is set.
PicardResult solve_u_picard(const Mesh& mesh, const NodalField& v, const ConstraintSet& bc, const ModelParams& p,
                            const PicardOptions& opt, const NodalField* u0 = nullptr);

/// v-system (2 rho K + R(u, v_lag)) v = delta M 1 with constrained vertices.
/// R is the lumped (diagonal) or consistent reaction matrix.  Throws
/// SingularSystem when R vanishes and nothing is constrained.
SparseSystem assemble_v_system(const Mesh& mesh, const NodalField& u, const NodalField& v_lag,
                               const ConstraintSet& cons, const ModelParams& p, bool lumped = true);

/// CG solve of an assembled system; `max_iter` <= 0 means 10 n.
std::vector<double> solve_sparse(const SparseSystem& sys, double tol_lin, int max_iter = 0,
                                 const std::vector<double>* x0 = nullptr);

struct BoxSolveStats {
  int active_set_iterations = 0;
  std::size_t at_lower = 0;
  std::size_t at_upper = 0;
};

/// Minimizes 1/2 x^T A x - b^T x over lo <= x <= hi (constrained vertices
/// kept) by a primal-dual active-set iteration.
std::vector<double> solve_sparse_box(const SparseSystem& sys, double lo, double hi, double tol_lin,
                                     BoxSolveStats* stats = nullptr);

/// Values <= xi_v become 0, values >= 1 become 1.
NodalField clamp_v(const NodalField& v, double xi_v);

}  // namespace slfrac
