#pragma once

#include <array>
#include <vector>

namespace slfrac {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

/// Triangle quadrature point in barycentric coordinates.  Weights are
/// fractions of the element area and sum to one.
struct TrianglePoint {
  std::array<double, 3> bary;
  double weight;
};

/// Edge quadrature point: position s in [0,1] along the edge, weight as a
/// fraction of the edge length.
struct EdgePoint {
  double s;
  double weight;
};

/// Collapsed (Duffy) Gauss-Legendre rule with n points per direction;
/// exact for polynomials of degree 2n-2 on a triangle.
std::vector<TrianglePoint> collapsed_triangle_rule(int n);

/// Production rules used by energy, derivative, assembly and estimator code.
const std::vector<TrianglePoint>& triangle_rule();
const std::vector<EdgePoint>& edge_rule();

}  // namespace slfrac
