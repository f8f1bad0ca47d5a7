#include "slfrac/model.hpp"

#include "slfrac/error.hpp"
#include "slfrac/quadrature.hpp"

namespace slfrac {

void ModelParams::validate() const {
  if (!(alpha > 0.0)) throw InvalidInput("model: alpha must be positive");
  if (!(beta >= 0.0)) throw InvalidInput("model: beta must be nonnegative");
  if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidInput("model: kappa must lie in (0,1)");
  if (!(epsilon > 0.0)) throw InvalidInput("model: epsilon must be positive");
  if (!(lambda_c > 0.0)) throw InvalidInput("model: lambda_c must be positive");
  if (!(c_w > 0.0)) throw InvalidInput("model: c_w must be positive");
}

NodalField::NodalField(const Mesh& mesh, std::vector<double> vals) : values(std::move(vals)), mesh_id(mesh.id()) {
  if (values.size() != mesh.num_vertices()) throw MeshMismatch("NodalField: size does not match the vertex count");
}

NodalField NodalField::constant(const Mesh& mesh, double c) {
  return NodalField(mesh, std::vector<double>(mesh.num_vertices(), c));
}

void require_bound(const NodalField& f, const Mesh& mesh, const char* what) {
  if (f.mesh_id != mesh.id() || f.size() != mesh.num_vertices()) {
    throw MeshMismatch(std::string(what) + ": field is not bound to this mesh");
  }
}

StrainLaw::StrainLaw(const ModelParams& p)
    : alpha_(p.alpha),
      beta_pow_(std::pow(p.beta, p.alpha)),
      kappa_(p.kappa),
      unit_alpha_(p.alpha == 1.0),
      linear_(p.beta == 0.0) {}

double stress_coefficient(double v_val, Vec2 grad_u, const ModelParams& p) {
  const StrainLaw law(p);
  const double c = law.degradation(v_val * v_val);
  return c * law.inv_denom_pow(c * dot(grad_u, grad_u));
}

namespace {

// v^2 at a quadrature point: pointwise square or interpolant of squares.
inline double v_squared(const std::array<double, 3>& vk, const std::array<double, 3>& l, bool lumped) {
  if (lumped) return l[0] * vk[0] * vk[0] + l[1] * vk[1] * vk[1] + l[2] * vk[2] * vk[2];
  const double v = l[0] * vk[0] + l[1] * vk[1] + l[2] * vk[2];
  return v * v;
}

inline std::array<double, 3> gather(const Mesh& mesh, int e, std::span<const double> w) {
  const Triangle& t = mesh.element(e);
  return {w[static_cast<std::size_t>(t[0])], w[static_cast<std::size_t>(t[1])], w[static_cast<std::size_t>(t[2])]};
}

}  // namespace

double element_stress_coefficient(const Mesh& mesh, int e, std::span<const double> v, Vec2 grad_u,
                                  const StrainLaw& law, bool lumped) {
  const std::array<double, 3> vk = gather(mesh, e, v);
  const double g2 = dot(grad_u, grad_u);
  double acc = 0.0;
  for (const TrianglePoint& q : triangle_rule()) {
    const double c = law.degradation(v_squared(vk, q.bary, lumped));
    acc += q.weight * c * law.inv_denom_pow(c * g2);
  }
  return acc;
}

std::array<double, 3> element_reaction_weights(const Mesh& mesh, int e, std::span<const double> v_lag,
                                               Vec2 grad_u, const StrainLaw& law, bool lumped) {
  const std::array<double, 3> vk = gather(mesh, e, v_lag);
  const double g2 = dot(grad_u, grad_u);
  std::array<double, 3> mu{0.0, 0.0, 0.0};
  if (g2 == 0.0) return mu;
  const double area = mesh.geometry(e).area;
  for (const TrianglePoint& q : triangle_rule()) {
    const double c = law.degradation(v_squared(vk, q.bary, lumped));
    const double m = (1.0 - law.kappa()) * g2 * law.inv_denom_pow(c * g2);
    for (int k = 0; k < 3; ++k) mu[static_cast<std::size_t>(k)] += area * q.weight * m * q.bary[static_cast<std::size_t>(k)];
  }
  return mu;
}

EnergySplit total_energy(const NodalField& u, const NodalField& v, const Mesh& mesh, const ModelParams& p,
                         bool lumped) {
  require_bound(u, mesh, "total_energy");
  require_bound(v, mesh, "total_energy");
  const StrainLaw law(p);
  const double rho = p.rho();
  const double delta = p.delta();
  EnergySplit out;
  for (std::size_t ei = 0; ei < mesh.num_elements(); ++ei) {
    const int e = static_cast<int>(ei);
    const double area = mesh.geometry(e).area;
    const Vec2 gu = element_gradient(mesh, e, u.values);
    const Vec2 gv = element_gradient(mesh, e, v.values);
    const std::array<double, 3> vk = gather(mesh, e, v.values);
    const double g2 = dot(gu, gu);
    if (g2 > 0.0) {
      double acc = 0.0;
      for (const TrianglePoint& q : triangle_rule()) {
        acc += q.weight * law.energy_density(law.degradation(v_squared(vk, q.bary, lumped)) * g2);
      }
      out.bulk += area * acc;
    }
    const double mean_v = (vk[0] + vk[1] + vk[2]) / 3.0;
    out.surface += area * (rho * dot(gv, gv) + delta * (1.0 - mean_v));
  }
  out.total = out.bulk + out.surface;
  return out;
}

double dir_derivative_A(const NodalField& v, const NodalField& u, const NodalField& psi, const Mesh& mesh,
                        const ModelParams& p, bool lumped) {
  require_bound(u, mesh, "dir_derivative_A");
  require_bound(v, mesh, "dir_derivative_A");
  require_bound(psi, mesh, "dir_derivative_A");
  const auto& dirichlet = mesh.dirichlet_vertices();
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (dirichlet[i] && psi[i] != 0.0) throw InvalidInput("dir_derivative_A: psi must vanish on Dirichlet vertices");
  }
  const StrainLaw law(p);
  double acc = 0.0;
  for (std::size_t ei = 0; ei < mesh.num_elements(); ++ei) {
    const int e = static_cast<int>(ei);
    const Vec2 gu = element_gradient(mesh, e, u.values);
    const Vec2 gp = element_gradient(mesh, e, psi.values);
    const double gg = dot(gu, gp);
    if (gg == 0.0) continue;
    acc += mesh.geometry(e).area * gg * element_stress_coefficient(mesh, e, v.values, gu, law, lumped);
  }
  return acc;
}

double dir_derivative_B(const NodalField& u, const NodalField& v, const NodalField& phi, const Mesh& mesh,
                        const ModelParams& p, bool lumped, std::span<const std::uint8_t> crack_mask) {
  require_bound(u, mesh, "dir_derivative_B");
  require_bound(v, mesh, "dir_derivative_B");
  require_bound(phi, mesh, "dir_derivative_B");
  if (!crack_mask.empty()) {
    if (crack_mask.size() != mesh.num_vertices()) throw MeshMismatch("dir_derivative_B: crack mask size");
    for (std::size_t i = 0; i < phi.size(); ++i) {
      if (crack_mask[i] && phi[i] != 0.0) throw InvalidInput("dir_derivative_B: phi must vanish on crack vertices");
    }
  }
  const StrainLaw law(p);
  const double rho = p.rho();
  const double delta = p.delta();
  double acc = 0.0;
  for (std::size_t ei = 0; ei < mesh.num_elements(); ++ei) {
    const int e = static_cast<int>(ei);
    const double area = mesh.geometry(e).area;
    const Vec2 gu = element_gradient(mesh, e, u.values);
    const Vec2 gv = element_gradient(mesh, e, v.values);
    const Vec2 gp = element_gradient(mesh, e, phi.values);
    const std::array<double, 3> vk = gather(mesh, e, v.values);
    const std::array<double, 3> pk = gather(mesh, e, phi.values);
    double local = 2.0 * rho * dot(gv, gp) - delta * (pk[0] + pk[1] + pk[2]) / 3.0;
    const double g2 = dot(gu, gu);
    if (g2 > 0.0) {
      double r = 0.0;
      for (const TrianglePoint& q : triangle_rule()) {
        const auto& l = q.bary;
        const double c = law.degradation(v_squared(vk, l, lumped));
        const double m = (1.0 - law.kappa()) * g2 * law.inv_denom_pow(c * g2);
        double vphi;
        if (lumped) {
          vphi = l[0] * vk[0] * pk[0] + l[1] * vk[1] * pk[1] + l[2] * vk[2] * pk[2];
        } else {
          vphi = (l[0] * vk[0] + l[1] * vk[1] + l[2] * vk[2]) * (l[0] * pk[0] + l[1] * pk[1] + l[2] * pk[2]);
        }
        r += q.weight * m * vphi;
      }
      local += r;
    }
    acc += area * local;
  }
  return acc;
}

NodalField nodal_interpolate(const std::function<double(double)>& g, const NodalField& f, const Mesh& mesh) {
  require_bound(f, mesh, "nodal_interpolate");
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = g(f[i]);
  return NodalField(mesh, std::move(out));
}

NodalField nodal_interpolate(const std::function<double(double, double)>& g, const NodalField& a,
                             const NodalField& b, const Mesh& mesh) {
  require_bound(a, mesh, "nodal_interpolate");
  require_bound(b, mesh, "nodal_interpolate");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = g(a[i], b[i]);
  return NodalField(mesh, std::move(out));
}

double evaluate(const Mesh& mesh, const NodalField& f, Vec2 p) {
  require_bound(f, mesh, "evaluate");
  std::array<double, 3> l{};
  const int e = locate(mesh, p, &l);
  if (e < 0) throw InvalidInput("evaluate: point outside the mesh");
  const auto vk = gather(mesh, e, f.values);
  return l[0] * vk[0] + l[1] * vk[1] + l[2] * vk[2];
}

}  // namespace slfrac
