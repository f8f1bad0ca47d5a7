#include "slfrac/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "slfrac/error.hpp"

namespace slfrac {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw InvalidInput("gauss_legendre: n must be positive");
  GaussLegendre r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

std::vector<TrianglePoint> collapsed_triangle_rule(int n) {
  const GaussLegendre g = gauss_legendre(n);
  std::vector<TrianglePoint> pts;
  pts.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    const double a = 0.5 * (g.nodes[static_cast<std::size_t>(i)] + 1.0);
    const double wa = 0.5 * g.weights[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double b = 0.5 * (g.nodes[static_cast<std::size_t>(j)] + 1.0);
      const double wb = 0.5 * g.weights[static_cast<std::size_t>(j)];
      const double xi = a;
      const double eta = b * (1.0 - a);
      // reference area is 1/2, so the area fraction carries a factor 2
      pts.push_back({{1.0 - xi - eta, xi, eta}, 2.0 * wa * wb * (1.0 - a)});
    }
  }
  return pts;
}

const std::vector<TrianglePoint>& triangle_rule() {
  static const std::vector<TrianglePoint> rule = collapsed_triangle_rule(6);
  return rule;
}

const std::vector<EdgePoint>& edge_rule() {
  static const std::vector<EdgePoint> rule = [] {
    const GaussLegendre g = gauss_legendre(5);
    std::vector<EdgePoint> r;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) r.push_back({0.5 * (g.nodes[i] + 1.0), 0.5 * g.weights[i]});
    return r;
  }();
  return rule;
}

}  // namespace slfrac
