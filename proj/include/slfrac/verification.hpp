#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "slfrac/estimator.hpp"
#include "slfrac/model.hpp"

namespace slfrac {

struct OracleReport {
  std::string name;
  std::size_t samples = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::string oracle_csv_header();
std::string to_csv(const OracleReport& r);

/// Grundmann-Moller rule of degree 2s+1 on a triangle: barycentric points
/// and weights as fractions of the area.
struct SimplexRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};
SimplexRule grundmann_moller_triangle(int s);
/// Same family on a segment: positions in [0,1] and weight fractions.
std::vector<std::pair<double, double>> grundmann_moller_segment(int s);

/// Integral of f over the mesh with a symmetric rule exact to `degree`
/// (at most 8).  Throws InvalidInput for unsupported degrees.
double quadrature_oracle(const std::function<double(Vec2)>& f, const Mesh& mesh, int degree);

/// Finite-difference check of A + B against the energy.  max_error holds the
/// order deficit 1 - order of the difference-quotient error over `t_values`
/// (tolerance 0.1, so pass iff order >= 0.9).
OracleReport gradient_check(const Mesh& mesh, const NodalField& u, const NodalField& v, const NodalField& psi,
                            const NodalField& phi, const ModelParams& p, const std::vector<double>& t_values,
                            bool lumped = false);

/// Fitted order and raw errors of the same check.
struct GradientSweep {
  std::vector<double> t;
  std::vector<double> error;
  double order = 0.0;
  bool exact = false;   // all errors at round-off level
};
GradientSweep gradient_sweep(const Mesh& mesh, const NodalField& u, const NodalField& v, const NodalField& psi,
                             const NodalField& phi, const ModelParams& p, const std::vector<double>& t_values,
                             bool lumped);

/// Exhaustive minimum cardinality of a Dorfler set (n <= 12).
std::size_t marking_oracle(std::span<const double> eta_sq, double theta);

/// Indicator terms recomputed from scratch with Grundmann-Moller rules of
/// degree 9, brute-force neighbour search and independent geometry.
/// `crack_vertex` flags the endpoints of crack edges (may be empty).
ElementIndicators oracle_indicators(const Mesh& mesh, const NodalField& u, const NodalField& v, const ModelParams& p,
                                    std::span<const std::uint8_t> crack_vertex = {});

/// Largest relative deviation between two indicator sets over all terms,
/// entry by entry, with a floor of 1e-12 times the largest entry of the term.
double indicator_deviation(const ElementIndicators& a, const ElementIndicators& b);

/// Property suites behind the `verify` command.
std::vector<OracleReport> run_verification_suite(std::uint64_t seed);

}  // namespace slfrac
