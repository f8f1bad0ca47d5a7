#include "slfrac/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slfrac/error.hpp"
#include "slfrac/quadrature.hpp"

namespace slfrac {

void ConstraintSet::add(int vertex, double value) {
  auto [it, inserted] = values_.emplace(vertex, value);
  if (!inserted && it->second != value) {
    throw InvalidInput("ConstraintSet: vertex " + std::to_string(vertex) + " constrained to conflicting values");
  }
}

std::vector<std::uint8_t> ConstraintSet::mask(std::size_t num_vertices) const {
  std::vector<std::uint8_t> m(num_vertices, 0);
  for (const auto& [v, value] : values_) {
    if (v >= 0 && static_cast<std::size_t>(v) < num_vertices) m[static_cast<std::size_t>(v)] = 1;
  }
  return m;
}

void apply_constraints(SparseSystem& sys) {
  sys.matrix = sys.raw_matrix;
  sys.rhs = sys.raw_rhs;
  CsrMatrix& a = sys.matrix;
  const auto& cons = sys.constrained.values();
  if (cons.empty()) return;
  std::vector<std::uint8_t> fixed(a.n, 0);
  std::vector<double> g(a.n, 0.0);
  for (const auto& [v, value] : cons) {
    if (v < 0 || static_cast<std::size_t>(v) >= a.n) throw InvalidInput("apply_constraints: vertex out of range");
    fixed[static_cast<std::size_t>(v)] = 1;
    g[static_cast<std::size_t>(v)] = value;
  }
  for (std::size_t i = 0; i < a.n; ++i) {
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const auto j = static_cast<std::size_t>(a.col[static_cast<std::size_t>(k)]);
      double& aij = a.val[static_cast<std::size_t>(k)];
      if (fixed[i]) {
        aij = (i == j) ? 1.0 : 0.0;
      } else if (fixed[j]) {
        sys.rhs[i] -= aij * g[j];
        aij = 0.0;
      }
    }
    if (fixed[i]) sys.rhs[i] = g[i];
  }
}

namespace {

void add_local(CsrMatrix& a, const Triangle& t, const double (&local)[3][3]) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a.add(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)], local[i][j]);
  }
}

void stiffness(const ElementGeometry& g, double coeff, double (&local)[3][3]) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      local[i][j] = coeff * g.area * dot(g.grad_lambda[static_cast<std::size_t>(i)], g.grad_lambda[static_cast<std::size_t>(j)]);
    }
  }
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

SparseSystem assemble_u_system(const Mesh& mesh, const NodalField& v, const NodalField& u_lag,
                               const ConstraintSet& bc, const ModelParams& p, bool lumped) {
  require_bound(v, mesh, "assemble_u_system");
  require_bound(u_lag, mesh, "assemble_u_system");
  if (bc.empty()) throw SingularSystem("assemble_u_system: no Dirichlet data, the u-problem is singular");
  const StrainLaw law(p);
  SparseSystem sys;
  sys.raw_matrix = pattern_from_mesh(mesh);
  sys.raw_rhs.assign(mesh.num_vertices(), 0.0);
  double local[3][3];
  for (std::size_t ei = 0; ei < mesh.num_elements(); ++ei) {
    const int e = static_cast<int>(ei);
    const Vec2 gu = element_gradient(mesh, e, u_lag.values);
    stiffness(mesh.geometry(e), element_stress_coefficient(mesh, e, v.values, gu, law, lumped), local);
    add_local(sys.raw_matrix, mesh.element(e), local);
  }
  sys.constrained = bc;
  apply_constraints(sys);
  return sys;
}

std::vector<double> solve_sparse(const SparseSystem& sys, double tol_lin, int max_iter, const std::vector<double>* x0) {
  return pcg(sys.matrix, sys.rhs, tol_lin, max_iter, x0);
}

PicardResult solve_u_picard(const Mesh& mesh, const NodalField& v, const ConstraintSet& bc, const ModelParams& p,
                            const PicardOptions& opt, const NodalField* u0) {
  require_bound(v, mesh, "solve_u_picard");
  std::vector<double> u = u0 ? u0->values : std::vector<double>(mesh.num_vertices(), 0.0);
  if (u0) require_bound(*u0, mesh, "solve_u_picard");
  for (const auto& [i, value] : bc.values()) u[static_cast<std::size_t>(i)] = value;

  PicardResult result;
  const bool linear = p.beta == 0.0;
  double omega = 1.0;
  double prev_inc = std::numeric_limits<double>::infinity();
  // inner tolerance: loose while the increments are large, tol_lin for the final check
  double forcing = linear ? opt.tol_lin : std::max(opt.tol_lin, opt.inexact ? 1e-6 : 0.0);
  for (int it = 1; it <= opt.max_iter; ++it) {
    const NodalField lag(mesh, u);
    const SparseSystem sys = assemble_u_system(mesh, v, lag, bc, p, opt.lumped);
    std::vector<double> next = solve_sparse(sys, forcing, 0, &u);
    if (omega < 1.0) {
      std::vector<double> relaxed(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) relaxed[i] = omega * next[i] + (1.0 - omega) * u[i];
      const double e_relaxed = total_energy(NodalField(mesh, relaxed), v, mesh, p, opt.lumped).total;
      const double e_full = total_energy(NodalField(mesh, next), v, mesh, p, opt.lumped).total;
      // the undamped step is a majorize-minimize step; damping only wins if it lowers the energy further
      if (e_relaxed < e_full) next = std::move(relaxed);
    }
    const double inc = max_abs_diff(next, u);
    u = std::move(next);
    result.history.push_back(inc);
    result.iterations = it;
    if (linear || inc <= opt.tol_picard) {
      if (forcing <= opt.tol_lin) {
        result.u = NodalField(mesh, std::move(u));
        return result;
      }
      forcing = opt.tol_lin;
      continue;
    }
    if (inc > prev_inc) omega = std::max(0.5 * omega, 1.0 / 64.0);
    prev_inc = inc;
    if (opt.inexact) {
      double scale = 0.0;
      for (double x : u) scale = std::max(scale, std::abs(x));
      forcing = std::clamp(1e-2 * inc / std::max(scale, 1e-300), opt.tol_lin, 1e-4);
    }
  }
  if (opt.allow_stall) {
    result.converged = false;
    result.u = NodalField(mesh, std::move(u));
    return result;
  }
  throw ConvergenceError("solve_u_picard: no convergence within " + std::to_string(opt.max_iter) + " iterations",
                         std::move(result.history));
}

SparseSystem assemble_v_system(const Mesh& mesh, const NodalField& u, const NodalField& v_lag,
                               const ConstraintSet& cons, const ModelParams& p, bool lumped) {
  require_bound(u, mesh, "assemble_v_system");
  require_bound(v_lag, mesh, "assemble_v_system");
  const StrainLaw law(p);
  const double rho = p.rho();
  const double delta = p.delta();
  SparseSystem sys;
  sys.raw_matrix = pattern_from_mesh(mesh);
  sys.raw_rhs.assign(mesh.num_vertices(), 0.0);
  bool reaction = false;
  double local[3][3];
  for (std::size_t ei = 0; ei < mesh.num_elements(); ++ei) {
    const int e = static_cast<int>(ei);
    const ElementGeometry& g = mesh.geometry(e);
    const Triangle& t = mesh.element(e);
    stiffness(g, 2.0 * rho, local);
    const Vec2 gu = element_gradient(mesh, e, u.values);
    if (dot(gu, gu) > 0.0) {
      reaction = true;
      if (lumped) {
        const auto mu = element_reaction_weights(mesh, e, v_lag.values, gu, law, true);
        for (int k = 0; k < 3; ++k) local[k][k] += mu[static_cast<std::size_t>(k)];
      } else {
        // consistent reaction matrix int m lambda_i lambda_j
        const auto& vl = v_lag.values;
        const double g2 = dot(gu, gu);
        const std::array<double, 3> vk{vl[static_cast<std::size_t>(t[0])], vl[static_cast<std::size_t>(t[1])],
                                       vl[static_cast<std::size_t>(t[2])]};
        for (const TrianglePoint& q : triangle_rule()) {
          const auto& l = q.bary;
          const double vq = l[0] * vk[0] + l[1] * vk[1] + l[2] * vk[2];
          const double c = law.degradation(vq * vq);
          const double m = (1.0 - law.kappa()) * g2 * law.inv_denom_pow(c * g2);
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
              local[i][j] += g.area * q.weight * m * l[static_cast<std::size_t>(i)] * l[static_cast<std::size_t>(j)];
            }
          }
        }
      }
    }
    add_local(sys.raw_matrix, t, local);
    for (int k = 0; k < 3; ++k) sys.raw_rhs[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])] += delta * g.area / 3.0;
  }
  if (!reaction && cons.empty()) {
    throw SingularSystem("assemble_v_system: no reaction term and no constraints, the v-problem is singular");
  }
  sys.constrained = cons;
  apply_constraints(sys);
  return sys;
}

std::vector<double> solve_sparse_box(const SparseSystem& sys, double lo, double hi, double tol_lin,
                                     BoxSolveStats* stats) {
  enum : std::uint8_t { free_node, at_lo, at_hi };
  const std::size_t n = sys.matrix.n;
  const std::vector<std::uint8_t> fixed = sys.constrained.mask(n);
  std::vector<double> x = solve_sparse(sys, tol_lin);
  std::vector<std::uint8_t> state(n, free_node);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i]) continue;
    if (x[i] > hi) state[i] = at_hi, any = true;
    else if (x[i] < lo) state[i] = at_lo, any = true;
  }
  BoxSolveStats local_stats;
  if (!any) {
    if (stats) *stats = local_stats;
    return x;
  }
  std::vector<double> r(n);
  for (int it = 1; it <= 200; ++it) {
    SparseSystem active;
    active.raw_matrix = sys.raw_matrix;
    active.raw_rhs = sys.raw_rhs;
    active.constrained = sys.constrained;
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == at_lo) active.constrained.add(static_cast<int>(i), lo);
      if (state[i] == at_hi) active.constrained.add(static_cast<int>(i), hi);
      if (state[i] != free_node) x[i] = state[i] == at_lo ? lo : hi;
    }
    apply_constraints(active);
    x = solve_sparse(active, tol_lin, 0, &x);
    sys.raw_matrix.multiply(x, r);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = sys.raw_rhs[i] - r[i];
      scale = std::max(scale, std::abs(sys.raw_rhs[i]));
    }
    const double slack = 1e-12 * scale;
    bool changed = false;
    local_stats = {it, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      std::uint8_t s = state[i];
      if (s == at_hi && r[i] < -slack) s = free_node;
      else if (s == at_lo && r[i] > slack) s = free_node;
      else if (s == free_node && x[i] > hi) s = at_hi;
      else if (s == free_node && x[i] < lo) s = at_lo;
      if (s != state[i]) changed = true;
      state[i] = s;
      if (s == at_lo) ++local_stats.at_lower;
      if (s == at_hi) ++local_stats.at_upper;
    }
    if (!changed) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i]) x[i] = std::clamp(x[i], lo, hi);
      }
      if (stats) *stats = local_stats;
      return x;
    }
  }
  throw ConvergenceError("solve_sparse_box: active set did not settle", {});
}

NodalField clamp_v(const NodalField& v, double xi_v) {
  NodalField out = v;
  for (double& x : out.values) {
    if (x <= xi_v) x = 0.0;
    else if (x >= 1.0) x = 1.0;
  }
  return out;
}

}  // namespace slfrac
