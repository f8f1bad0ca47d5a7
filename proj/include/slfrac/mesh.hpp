#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace slfrac {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

enum class BoundaryTag : std::uint8_t {
  interior,
  dirichlet_top_left,
  dirichlet_top_right,
  neumann_outer,
  slit_face,
};

const char* to_string(BoundaryTag tag);

inline bool is_dirichlet(BoundaryTag tag) {
  return tag == BoundaryTag::dirichlet_top_left || tag == BoundaryTag::dirichlet_top_right;
}

/// Vertex triple of a triangle.  Local vertex 0 is the newest vertex; the
/// refinement edge is the one opposite to it, i.e. (v[1], v[2]).
using Triangle = std::array<int, 3>;

struct Edge {
  std::array<int, 2> v{};             // sorted vertex ids
  std::array<int, 2> elem{-1, -1};    // elem[1] == -1 on the boundary
  BoundaryTag tag = BoundaryTag::interior;

  bool on_boundary() const { return elem[1] < 0; }
};

struct ElementGeometry {
  double area = 0.0;
  double diameter = 0.0;                 // longest edge
  std::array<Vec2, 3> grad_lambda{};     // barycentric gradients, sum to zero
};

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// Boundary tags keyed by edge_key().  Edges absent from the map are interior
/// (two incident elements) or neumann_outer (one incident element).
using BoundaryMap = std::map<std::uint64_t, BoundaryTag>;

/// Conforming triangulation of a planar domain.  Immutable once built;
/// refinement produces a new Mesh with a fresh id().
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> vertices, std::vector<Triangle> elements, BoundaryMap boundary,
       std::vector<int> parent = {}, std::vector<int> root = {}, int generation = 0);

  std::uint64_t id() const { return id_; }
  int generation() const { return generation_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& elements() const { return elements_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const BoundaryMap& boundary() const { return boundary_; }

  const Vec2& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const Triangle& element(int e) const { return elements_[static_cast<std::size_t>(e)]; }
  const Edge& edge(int i) const { return edges_[static_cast<std::size_t>(i)]; }

  /// Edge ids of element e; entry k is the edge opposite local vertex k.
  const std::array<int, 3>& element_edges(int e) const {
    return element_edges_[static_cast<std::size_t>(e)];
  }

  /// Parent element in the previous generation (-1 for generation-0 elements).
  int parent(int e) const { return parent_[static_cast<std::size_t>(e)]; }
  /// Generation-0 ancestor.
  int root(int e) const { return root_[static_cast<std::size_t>(e)]; }

  const ElementGeometry& geometry(int e) const { return geometry_[static_cast<std::size_t>(e)]; }

  /// Per-vertex flag: vertex lies on a Dirichlet-tagged edge.
  const std::vector<std::uint8_t>& dirichlet_vertices() const { return dirichlet_vertex_; }

  /// Dirichlet side of a vertex: the tag of a Dirichlet edge it belongs to,
  /// interior otherwise.
  BoundaryTag dirichlet_side(int vertex) const { return dirichlet_side_[static_cast<std::size_t>(vertex)]; }

  double min_diameter() const;
  double max_diameter() const;
  double total_area() const;

 private:
  void build_topology();

  std::uint64_t id_ = 0;
  int generation_ = 0;
  std::vector<Vec2> vertices_;
  std::vector<Triangle> elements_;
  BoundaryMap boundary_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> element_edges_;
  std::vector<int> parent_;
  std::vector<int> root_;
  std::vector<ElementGeometry> geometry_;
  std::vector<std::uint8_t> dirichlet_vertex_;
  std::vector<BoundaryTag> dirichlet_side_;
};

/// Geometry of a single triangle given by its corners.
ElementGeometry triangle_geometry(Vec2 a, Vec2 b, Vec2 c);

/// Area, diameter and barycentric gradients of element `elem`.
/// Throws InvalidInput for an out-of-range index.
ElementGeometry element_geometry(const Mesh& mesh, int elem);

/// Criss-cross triangulation of [0,1]^2: every cell of an n x n grid is split
/// by both diagonals into four right triangles around its centre.  All
/// boundary edges are tagged neumann_outer.
Mesh build_unit_square(int n);

/// [0,1]^2 with a vertical slit from (0.5, 1) down to (0.5, slit_tip_y).
/// Vertices on the open slit (tip excluded) are duplicated so the two faces
/// carry separate unknowns.  Top edges left/right of the slit are tagged
/// dirichlet_top_left/right, slit edges slit_face, the rest neumann_outer.
/// Requires n even and slit_tip_y on a grid line strictly inside (0,1).
Mesh build_unit_square_with_slit(int n_initial, double slit_tip_y);

struct RefinementResult {
  Mesh mesh;
  /// For each vertex created by the refinement (ids >= old vertex count, in
  /// order) the endpoints of the bisected edge.
  std::vector<std::array<int, 2>> new_vertex_parents;
  std::size_t old_vertex_count = 0;
};

/// Newest-vertex bisection of the marked elements plus conformity closure.
/// Each marked element is bisected at least once; an empty marked set
/// returns an identical (but newly numbered) mesh.
RefinementResult bisect(const Mesh& mesh, std::span<const int> marked);

/// Uniform refinement: every element bisected twice (edges halved).
RefinementResult refine_uniform(const Mesh& mesh);

/// Values of a P1 function after refinement: old values are kept and new
/// vertices receive the mean of their parent edge endpoints.
std::vector<double> prolongate(std::span<const double> values, const RefinementResult& r);

struct ConformityReport {
  bool conforming = true;
  std::vector<std::string> problems;
};

/// Topological conformity: every edge has one or two incident elements, every
/// one-sided edge lies on the outer boundary or carries the slit_face tag, and
/// all elements are positively oriented.
ConformityReport check_conformity(const Mesh& mesh);

struct SignConditionEntry {
  int i = 0;
  int j = 0;
  double a_ij = 0.0;
};

/// Lists vertex pairs i<j whose stiffness entry int grad xi_i . grad xi_j is
/// positive (beyond round-off).  Diagnostic only.
std::vector<SignConditionEntry> check_stiffness_sign_condition(const Mesh& mesh);

/// Smallest interior angle over all elements, in radians.
double min_angle(const Mesh& mesh);

/// Largest ratio diameter / inscribed-circle diameter over all elements.
double shape_regularity(const Mesh& mesh);

/// Element containing point p (brute force), -1 if none.  Returns the
/// barycentric coordinates through `bary` when found.
int locate(const Mesh& mesh, Vec2 p, std::array<double, 3>* bary = nullptr);

}  // namespace slfrac
