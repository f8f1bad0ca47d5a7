#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "slfrac/mesh.hpp"

namespace slfrac {

struct ModelParams {
  double alpha = 1.0;
  double beta = 1.0;
  double kappa = 1e-10;
  double epsilon = 0.625;
  double lambda_c = 2.7;
  double c_w = 8.0 / 3.0;

  double rho() const { return lambda_c * epsilon / c_w; }
  double delta() const { return lambda_c / (c_w * epsilon); }

  /// Throws InvalidInput unless alpha, epsilon, lambda_c, c_w > 0, beta >= 0
  /// and kappa in (0, 1).
  void validate() const;
};

/// P1 coefficient vector bound to the mesh it was created on.
struct NodalField {
  std::vector<double> values;
  std::uint64_t mesh_id = 0;

  NodalField() = default;
  NodalField(const Mesh& mesh, std::vector<double> vals);
  static NodalField constant(const Mesh& mesh, double c);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// Throws MeshMismatch unless `f` was built on `mesh`.
void require_bound(const NodalField& f, const Mesh& mesh, const char* what);

struct EnergySplit {
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
};

/// Scalar strain-limiting law in terms of s = |T|^2.
class StrainLaw {
 public:
  explicit StrainLaw(const ModelParams& p);

  /// 1 + beta^alpha s^alpha
  double denom(double s) const {
    if (linear_) return 1.0;
    return unit_alpha_ ? 1.0 + beta_pow_ * s : 1.0 + beta_pow_ * std::pow(s, alpha_);
  }
  /// s / (2 D^{1/alpha})
  double energy_density(double s) const {
    const double d = denom(s);
    return unit_alpha_ ? 0.5 * s / d : 0.5 * s / std::pow(d, 1.0 / alpha_);
  }
  /// D^{-(1/alpha + 1)}
  double inv_denom_pow(double s) const {
    const double d = denom(s);
    return unit_alpha_ ? 1.0 / (d * d) : std::pow(d, -(1.0 / alpha_ + 1.0));
  }
  /// D^{-(1/alpha + 2)}
  double inv_denom_pow2(double s) const {
    const double d = denom(s);
    return unit_alpha_ ? 1.0 / (d * d * d) : std::pow(d, -(1.0 / alpha_ + 2.0));
  }
  /// 1 - alpha beta^alpha s^alpha
  double slope_factor(double s) const {
    if (linear_) return 1.0;
    return 1.0 - alpha_ * beta_pow_ * (unit_alpha_ ? s : std::pow(s, alpha_));
  }
  /// (1 - kappa) w + kappa, where w stands for v^2 or its interpolant.
  double degradation(double w) const { return (1.0 - kappa_) * w + kappa_; }
  double kappa() const { return kappa_; }

 private:
  double alpha_;
  double beta_pow_;
  double kappa_;
  bool unit_alpha_;
  bool linear_;
};

/// Gradient of a P1 field on element e.
inline Vec2 element_gradient(const Mesh& mesh, int e, std::span<const double> w) {
  const Triangle& t = mesh.element(e);
  const ElementGeometry& g = mesh.geometry(e);
  Vec2 r;
  for (int k = 0; k < 3; ++k) r = r + w[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])] * g.grad_lambda[static_cast<std::size_t>(k)];
  return r;
}

/// a = ((1-kappa) v^2 + kappa) / (1 + beta^alpha |T|^{2 alpha})^{1/alpha + 1}
/// with |T|^2 = ((1-kappa) v^2 + kappa) |grad u|^2.
double stress_coefficient(double v_val, Vec2 grad_u, const ModelParams& p);

/// Element mean of the stress coefficient a(x), with v^2 taken pointwise or
/// (lumped) as the P1 interpolant of the vertex squares.
double element_stress_coefficient(const Mesh& mesh, int e, std::span<const double> v, Vec2 grad_u,
                                  const StrainLaw& law, bool lumped);

/// Lumped reaction weights for the v-equation: mu_k = int_tau m(x) lambda_k dx,
/// m = (1-kappa)|grad u|^2 / D^{1/alpha+1} with D evaluated at v_lag.
std::array<double, 3> element_reaction_weights(const Mesh& mesh, int e, std::span<const double> v_lag,
                                               Vec2 grad_u, const StrainLaw& law, bool lumped);

EnergySplit total_energy(const NodalField& u, const NodalField& v, const Mesh& mesh, const ModelParams& p,
                         bool lumped);

/// A(v; u, psi).  `psi` must vanish on Dirichlet vertices.
double dir_derivative_A(const NodalField& v, const NodalField& u, const NodalField& psi, const Mesh& mesh,
                        const ModelParams& p, bool lumped);

/// B(u; v, phi).  `phi` must vanish on every vertex flagged in `crack_mask`
/// (empty mask: no crack constraint).
double dir_derivative_B(const NodalField& u, const NodalField& v, const NodalField& phi, const Mesh& mesh,
                        const ModelParams& p, bool lumped, std::span<const std::uint8_t> crack_mask = {});

/// Vertexwise application of g.
NodalField nodal_interpolate(const std::function<double(double)>& g, const NodalField& f, const Mesh& mesh);
NodalField nodal_interpolate(const std::function<double(double, double)>& g, const NodalField& a,
                             const NodalField& b, const Mesh& mesh);

/// Value of a P1 field at a point of the domain.  Throws InvalidInput when p
/// lies outside the mesh.
double evaluate(const Mesh& mesh, const NodalField& f, Vec2 p);

}  // namespace slfrac
