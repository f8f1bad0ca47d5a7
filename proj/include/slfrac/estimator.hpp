#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "slfrac/mesh.hpp"
#include "slfrac/model.hpp"

namespace slfrac {

/// Per-element residual indicators.  tilde_terms / hat_terms hold the three
/// squared contributions of each indicator (two volume terms, edge term).
struct ElementIndicators {
  std::vector<double> eta_tilde_sq;
  std::vector<double> eta_hat_sq;
  std::vector<double> eta_sq;
  std::array<std::vector<double>, 3> tilde_terms;
  std::array<std::vector<double>, 3> hat_terms;
  std::uint64_t mesh_id = 0;

  double global_eta() const;
  double global_eta_tilde() const;
  double global_eta_hat() const;
};

struct IndicatorOptions {
  /// Per-edge flag for edges of the crack set; their v-jumps are dropped.
  std::vector<std::uint8_t> crack_edges;
};

/// Normal-gradient jump of a P1 field across an edge.  Interior edges:
/// (grad w|tau_i - grad w|tau_j) . n with tau_i the higher-index element and
/// n its outward normal.  Boundary edges: grad w . n (outward).
double jump_normal_gradient(const Mesh& mesh, const NodalField& w, int edge);

/// Outward unit normal of element `elem` on edge `edge`.
Vec2 outward_normal(const Mesh& mesh, int elem, int edge);

ElementIndicators compute_indicators(const Mesh& mesh, const NodalField& u, const NodalField& v,
                                     const ModelParams& p, const IndicatorOptions& opt = {});

/// Uniform refinement of a mesh kept together with the steps needed to carry
/// coarse P1 fields onto it.
struct ProbeSpace {
  std::vector<RefinementResult> levels;
  const Mesh& mesh() const { return levels.back().mesh; }
  NodalField transfer(const NodalField& coarse) const;
};

ProbeSpace make_probe_space(const Mesh& mesh, int levels);

struct DualProbe {
  double lhs = 0.0;             // |J'(u, v; psi, phi)|
  double rhs_tilde = 0.0;       // eta_tilde_h ||grad psi||
  double rhs_hat = 0.0;         // eta_hat_h ||grad phi||
};

/// Evaluates the unlumped derivative of the discrete pair (u, v) against
/// probes living on `probe.mesh()` and the matching estimator bounds.
/// psi must vanish on Dirichlet vertices and phi on `crack_mask` vertices of
/// the probe mesh.
DualProbe residual_dual_probe(const Mesh& mesh, const NodalField& u, const NodalField& v, const ProbeSpace& probe,
                              const NodalField& psi, const NodalField& phi, const ModelParams& p,
                              const ElementIndicators& eta, std::span<const std::uint8_t> crack_mask = {});

/// ||grad w||_{L^2}
double gradient_norm(const Mesh& mesh, const NodalField& w);

}  // namespace slfrac
