#include "slfrac/crack.hpp"

#include "slfrac/assembly.hpp"
#include "slfrac/error.hpp"

namespace slfrac {

CrackState CrackState::empty(const Mesh& mesh) {
  CrackState s;
  s.pinned.assign(mesh.num_vertices(), 0);
  s.crack_vertex.assign(mesh.num_vertices(), 0);
  s.mesh_id = mesh.id();
  return s;
}

std::size_t CrackState::num_pinned() const {
  std::size_t n = 0;
  for (auto p : pinned) n += p;
  return n;
}

std::vector<std::uint8_t> CrackState::crack_edges(const Mesh& mesh) const {
  if (mesh.id() != mesh_id) throw MeshMismatch("CrackState: state belongs to another mesh");
  std::vector<std::uint8_t> out(mesh.num_edges(), 0);
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    const Edge& e = mesh.edge(static_cast<int>(i));
    out[i] = crack_vertex[static_cast<std::size_t>(e.v[0])] && crack_vertex[static_cast<std::size_t>(e.v[1])];
  }
  return out;
}

std::vector<std::uint8_t> CrackState::zero_mask() const {
  std::vector<std::uint8_t> m(pinned.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = pinned[i] || crack_vertex[i];
  return m;
}

ConstraintSet CrackState::v_constraints() const {
  ConstraintSet c;
  const auto m = zero_mask();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) c.add(static_cast<int>(i), 0.0);
  }
  return c;
}

CrackState update_crack_state(const Mesh& mesh, const NodalField& v, const CrackState& state, double c_irr,
                              double xi_cr) {
  require_bound(v, mesh, "update_crack_state");
  if (state.mesh_id != mesh.id()) throw MeshMismatch("update_crack_state: state belongs to another mesh");
  CrackState out = state;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < c_irr) out.pinned[i] = 1;
  }
  out.crack_vertex.assign(mesh.num_vertices(), 0);
  for (const Edge& e : mesh.edges()) {
    const auto a = static_cast<std::size_t>(e.v[0]);
    const auto b = static_cast<std::size_t>(e.v[1]);
    if (v[a] <= xi_cr && v[b] <= xi_cr) out.crack_vertex[a] = out.crack_vertex[b] = 1;
  }
  return out;
}

CrackState transfer_crack_state(const CrackState& state, const RefinementResult& r) {
  if (state.pinned.size() != r.old_vertex_count) throw MeshMismatch("transfer_crack_state: size mismatch");
  CrackState out = state;
  for (const auto& [a, b] : r.new_vertex_parents) {
    out.pinned.push_back(state.pinned[static_cast<std::size_t>(a)] && state.pinned[static_cast<std::size_t>(b)]);
    out.crack_vertex.push_back(state.crack_vertex[static_cast<std::size_t>(a)] &&
                               state.crack_vertex[static_cast<std::size_t>(b)]);
  }
  out.mesh_id = r.mesh.id();
  return out;
}

}  // namespace slfrac
