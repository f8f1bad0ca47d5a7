#pragma once

#include <cstdint>
#include <vector>

#include "slfrac/mesh.hpp"
#include "slfrac/model.hpp"

namespace slfrac {

class ConstraintSet;

/// Crack bookkeeping on one mesh.  `pinned` vertices are held at v = 0 for
/// the rest of the simulation; `crack_vertex` marks the endpoints of the
/// discrete crack set CR_h (edges with both end values <= xi_cr).
struct CrackState {
  std::vector<std::uint8_t> pinned;
  std::vector<std::uint8_t> crack_vertex;
  std::uint64_t mesh_id = 0;

  static CrackState empty(const Mesh& mesh);

  std::size_t num_pinned() const;
  /// Edges of CR_h: both endpoints are crack vertices.
  std::vector<std::uint8_t> crack_edges(const Mesh& mesh) const;
  /// Vertices where v is held at zero (pinned or on CR_h).
  std::vector<std::uint8_t> zero_mask() const;
  ConstraintSet v_constraints() const;
};

/// End-of-step update: vertices with v < c_irr join the pinned set, CR_h is
/// recomputed from the current v.  The pinned set never shrinks.
CrackState update_crack_state(const Mesh& mesh, const NodalField& v, const CrackState& state, double c_irr,
                              double xi_cr);

/// Carries the state across a refinement: a new vertex inherits a flag when
/// both endpoints of its parent edge carry it.
CrackState transfer_crack_state(const CrackState& state, const RefinementResult& r);

}  // namespace slfrac
