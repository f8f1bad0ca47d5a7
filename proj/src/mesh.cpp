#include "slfrac/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "slfrac/error.hpp"

namespace slfrac {

namespace {

std::uint64_t next_mesh_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

// Rotates the triangle so that its longest edge becomes the refinement edge
// (opposite local vertex 0).  Ties go to the lowest opposite-vertex index.
// Orientation is made counter-clockwise by swapping the refinement-edge
// endpoints, which keeps the refinement edge.
Triangle orient_for_bisection(const std::vector<Vec2>& xs, Triangle t) {
  int best = 0;
  double best_len = -1.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 a = xs[static_cast<std::size_t>(t[(k + 1) % 3])];
    const Vec2 b = xs[static_cast<std::size_t>(t[(k + 2) % 3])];
    const double len = norm(b - a);
    const bool longer = len > best_len * (1.0 + 1e-12);
    const bool tie = !longer && len >= best_len * (1.0 - 1e-12);
    if (longer || (tie && t[k] < t[best])) {
      best = k;
      best_len = std::max(len, best_len);
    }
  }
  Triangle r{t[best], t[(best + 1) % 3], t[(best + 2) % 3]};
  const Vec2 p0 = xs[static_cast<std::size_t>(r[0])];
  const Vec2 p1 = xs[static_cast<std::size_t>(r[1])];
  const Vec2 p2 = xs[static_cast<std::size_t>(r[2])];
  if (cross(p1 - p0, p2 - p0) < 0.0) std::swap(r[1], r[2]);
  return r;
}

}  // namespace

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::interior: return "interior";
    case BoundaryTag::dirichlet_top_left: return "dirichlet_top_left";
    case BoundaryTag::dirichlet_top_right: return "dirichlet_top_right";
    case BoundaryTag::neumann_outer: return "neumann_outer";
    case BoundaryTag::slit_face: return "slit_face";
  }
  return "unknown";
}

ElementGeometry triangle_geometry(Vec2 a, Vec2 b, Vec2 c) {
  ElementGeometry g;
  const double twice_area = cross(b - a, c - a);
  g.area = 0.5 * twice_area;
  g.diameter = std::max({norm(b - a), norm(c - b), norm(a - c)});
  const std::array<Vec2, 3> x{a, b, c};
  for (int i = 0; i < 3; ++i) {
    const Vec2 e = x[static_cast<std::size_t>((i + 2) % 3)] - x[static_cast<std::size_t>((i + 1) % 3)];
    g.grad_lambda[static_cast<std::size_t>(i)] = {-e.y / twice_area, e.x / twice_area};
  }
  return g;
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<Triangle> elements, BoundaryMap boundary,
           std::vector<int> parent, std::vector<int> root, int generation)
    : id_(next_mesh_id()),
      generation_(generation),
      vertices_(std::move(vertices)),
      elements_(std::move(elements)),
      boundary_(std::move(boundary)),
      parent_(std::move(parent)),
      root_(std::move(root)) {
  const std::size_t ne = elements_.size();
  if (parent_.empty()) parent_.assign(ne, -1);
  if (root_.empty()) {
    root_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) root_[e] = static_cast<int>(e);
  }
  if (parent_.size() != ne || root_.size() != ne) {
    throw InvalidInput("Mesh: lineage arrays do not match the element count");
  }
  for (const Triangle& t : elements_) {
    for (int v : t) {
      if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) {
        throw InvalidInput("Mesh: element references a missing vertex");
      }
    }
  }
  build_topology();
}

void Mesh::build_topology() {
  const std::size_t ne = elements_.size();
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(ne * 2);
  edges_.clear();
  element_edges_.assign(ne, {-1, -1, -1});
  geometry_.resize(ne);

  for (std::size_t e = 0; e < ne; ++e) {
    const Triangle& t = elements_[e];
    geometry_[e] = triangle_geometry(vertices_[static_cast<std::size_t>(t[0])],
                                     vertices_[static_cast<std::size_t>(t[1])],
                                     vertices_[static_cast<std::size_t>(t[2])]);
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>((k + 1) % 3)];
      const int b = t[static_cast<std::size_t>((k + 2) % 3)];
      const std::uint64_t key = edge_key(a, b);
      auto [it, inserted] = index.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        Edge edge;
        edge.v = {std::min(a, b), std::max(a, b)};
        edge.elem = {static_cast<int>(e), -1};
        edges_.push_back(edge);
      } else {
        Edge& edge = edges_[static_cast<std::size_t>(it->second)];
        if (edge.elem[1] >= 0) throw InvalidInput("Mesh: edge shared by more than two elements");
        edge.elem[1] = static_cast<int>(e);
      }
      element_edges_[e][static_cast<std::size_t>(k)] = it->second;
    }
  }

  BoundaryMap pruned;
  for (Edge& edge : edges_) {
    const std::uint64_t key = edge_key(edge.v[0], edge.v[1]);
    auto it = boundary_.find(key);
    if (it != boundary_.end()) {
      edge.tag = it->second;
    } else {
      edge.tag = edge.on_boundary() ? BoundaryTag::neumann_outer : BoundaryTag::interior;
    }
    if (edge.tag != BoundaryTag::interior) pruned.emplace(key, edge.tag);
  }
  boundary_ = std::move(pruned);

  dirichlet_vertex_.assign(vertices_.size(), 0);
  dirichlet_side_.assign(vertices_.size(), BoundaryTag::interior);
  for (const Edge& edge : edges_) {
    if (!is_dirichlet(edge.tag)) continue;
    for (int v : edge.v) {
      dirichlet_vertex_[static_cast<std::size_t>(v)] = 1;
      dirichlet_side_[static_cast<std::size_t>(v)] = edge.tag;
    }
  }
}

double Mesh::min_diameter() const {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& g : geometry_) h = std::min(h, g.diameter);
  return h;
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (const auto& g : geometry_) h = std::max(h, g.diameter);
  return h;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (const auto& g : geometry_) a += g.area;
  return a;
}

ElementGeometry element_geometry(const Mesh& mesh, int elem) {
  if (elem < 0 || static_cast<std::size_t>(elem) >= mesh.num_elements()) {
    throw InvalidInput("element_geometry: element index out of range");
  }
  return mesh.geometry(elem);
}

namespace {

struct GridBuilder {
  int n;
  std::vector<Vec2> xs;
  std::vector<Triangle> tris;

  explicit GridBuilder(int n_) : n(n_) {
    const double h = 1.0 / n;
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) xs.push_back({i * h, j * h});
    }
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) xs.push_back({(i + 0.5) * h, (j + 0.5) * h});
    }
  }

  int grid(int i, int j) const { return j * (n + 1) + i; }
  int centre(int i, int j) const { return (n + 1) * (n + 1) + j * n + i; }
};

}  // namespace

Mesh build_unit_square(int n) {
  if (n < 1) throw InvalidInput("build_unit_square: n must be positive");
  GridBuilder g(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int c = g.centre(i, j);
      const std::array<int, 4> corner{g.grid(i, j), g.grid(i + 1, j), g.grid(i + 1, j + 1), g.grid(i, j + 1)};
      for (int k = 0; k < 4; ++k) {
        g.tris.push_back(orient_for_bisection(g.xs, {c, corner[static_cast<std::size_t>(k)],
                                                     corner[static_cast<std::size_t>((k + 1) % 4)]}));
      }
    }
  }
  return Mesh(std::move(g.xs), std::move(g.tris), {});
}

Mesh build_unit_square_with_slit(int n_initial, double slit_tip_y) {
  const int n = n_initial;
  if (n < 2 || n % 2 != 0) {
    throw InvalidInput("build_unit_square_with_slit: n_initial must be even and >= 2");
  }
  if (!(slit_tip_y > 0.0 && slit_tip_y < 1.0)) {
    throw InvalidInput("build_unit_square_with_slit: slit_tip_y must lie in (0,1)");
  }
  const double scaled = slit_tip_y * n;
  const int tip_j = static_cast<int>(std::lround(scaled));
  if (std::abs(scaled - tip_j) > 1e-9 || tip_j <= 0 || tip_j >= n) {
    throw InvalidInput("build_unit_square_with_slit: slit_tip_y must be a multiple of 1/n_initial");
  }

  GridBuilder g(n);
  const int mid = n / 2;
  // Right-face copies of the slit vertices strictly above the tip.
  std::vector<int> right_copy(static_cast<std::size_t>(n + 1), -1);
  for (int j = tip_j + 1; j <= n; ++j) {
    right_copy[static_cast<std::size_t>(j)] = static_cast<int>(g.xs.size());
    g.xs.push_back(g.xs[static_cast<std::size_t>(g.grid(mid, j))]);
  }
  auto vid = [&](int i, int j, bool right_side) {
    if (i == mid && right_side && right_copy[static_cast<std::size_t>(j)] >= 0) {
      return right_copy[static_cast<std::size_t>(j)];
    }
    return g.grid(i, j);
  };

  BoundaryMap boundary;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const bool right = i >= mid;
      const int c = g.centre(i, j);
      const std::array<int, 4> corner{vid(i, j, right), vid(i + 1, j, right), vid(i + 1, j + 1, right),
                                      vid(i, j + 1, right)};
      for (int k = 0; k < 4; ++k) {
        g.tris.push_back(orient_for_bisection(g.xs, {c, corner[static_cast<std::size_t>(k)],
                                                     corner[static_cast<std::size_t>((k + 1) % 4)]}));
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    const bool right = i >= mid;
    boundary[edge_key(vid(i, n, right), vid(i + 1, n, right))] =
        right ? BoundaryTag::dirichlet_top_right : BoundaryTag::dirichlet_top_left;
  }
  for (int j = tip_j; j < n; ++j) {
    boundary[edge_key(vid(mid, j, false), vid(mid, j + 1, false))] = BoundaryTag::slit_face;
    boundary[edge_key(vid(mid, j, true), vid(mid, j + 1, true))] = BoundaryTag::slit_face;
  }
  return Mesh(std::move(g.xs), std::move(g.tris), std::move(boundary));
}

RefinementResult bisect(const Mesh& mesh, std::span<const int> marked) {
  const std::size_t ne = mesh.num_elements();
  std::vector<std::uint8_t> edge_marked(mesh.num_edges(), 0);
  std::deque<int> queue;
  auto mark_edge = [&](int edge) {
    if (!edge_marked[static_cast<std::size_t>(edge)]) {
      edge_marked[static_cast<std::size_t>(edge)] = 1;
      queue.push_back(edge);
    }
  };
  for (int e : marked) {
    if (e < 0 || static_cast<std::size_t>(e) >= ne) throw InvalidInput("bisect: marked element out of range");
    mark_edge(mesh.element_edges(e)[0]);
  }
  // Closure: an element with any marked edge must also bisect its refinement edge.
  while (!queue.empty()) {
    const int edge = queue.front();
    queue.pop_front();
    for (int e : mesh.edge(edge).elem) {
      if (e >= 0) mark_edge(mesh.element_edges(e)[0]);
    }
  }

  RefinementResult result;
  result.old_vertex_count = mesh.num_vertices();
  std::vector<Vec2> xs = mesh.vertices();
  std::unordered_map<std::uint64_t, int> midpoint;
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    if (!edge_marked[i]) continue;
    const Edge& edge = mesh.edge(static_cast<int>(i));
    const int m = static_cast<int>(xs.size());
    xs.push_back(0.5 * (xs[static_cast<std::size_t>(edge.v[0])] + xs[static_cast<std::size_t>(edge.v[1])]));
    midpoint.emplace(edge_key(edge.v[0], edge.v[1]), m);
    result.new_vertex_parents.push_back(edge.v);
  }

  std::vector<Triangle> tris;
  std::vector<int> parent;
  std::vector<int> root;
  tris.reserve(ne + 3 * midpoint.size());
  auto emit = [&](auto&& self, const Triangle& t, int origin) -> void {
    auto it = midpoint.find(edge_key(t[1], t[2]));
    if (it == midpoint.end()) {
      tris.push_back(t);
      parent.push_back(origin);
      root.push_back(mesh.root(origin));
      return;
    }
    const int m = it->second;
    self(self, Triangle{m, t[0], t[1]}, origin);
    self(self, Triangle{m, t[2], t[0]}, origin);
  };
  for (std::size_t e = 0; e < ne; ++e) emit(emit, mesh.element(static_cast<int>(e)), static_cast<int>(e));

  BoundaryMap boundary;
  for (const auto& [key, tag] : mesh.boundary()) {
    auto it = midpoint.find(key);
    if (it == midpoint.end()) {
      boundary.emplace(key, tag);
      continue;
    }
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    boundary.emplace(edge_key(a, it->second), tag);
    boundary.emplace(edge_key(it->second, b), tag);
  }

  result.mesh = Mesh(std::move(xs), std::move(tris), std::move(boundary), std::move(parent), std::move(root),
                     mesh.generation() + 1);
  return result;
}

RefinementResult refine_uniform(const Mesh& mesh) {
  std::vector<int> all(mesh.num_elements());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
  RefinementResult first = bisect(mesh, all);
  all.resize(first.mesh.num_elements());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
  RefinementResult second = bisect(first.mesh, all);
  // compose so new vertices refer to the coarse numbering or earlier new ones
  second.new_vertex_parents.insert(second.new_vertex_parents.begin(), first.new_vertex_parents.begin(),
                                   first.new_vertex_parents.end());
  second.old_vertex_count = first.old_vertex_count;
  return second;
}

std::vector<double> prolongate(std::span<const double> values, const RefinementResult& r) {
  if (values.size() != r.old_vertex_count) throw MeshMismatch("prolongate: field size does not match the coarse mesh");
  std::vector<double> out(values.begin(), values.end());
  out.reserve(r.mesh.num_vertices());
  for (const auto& [a, b] : r.new_vertex_parents) {
    out.push_back(0.5 * (values[static_cast<std::size_t>(a)] + values[static_cast<std::size_t>(b)]));
  }
  return out;
}

ConformityReport check_conformity(const Mesh& mesh) {
  ConformityReport report;
  auto fail = [&](std::string msg) {
    report.conforming = false;
    report.problems.push_back(std::move(msg));
  };
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    if (!(mesh.geometry(static_cast<int>(e)).area > 0.0)) fail("element " + std::to_string(e) + " is not positively oriented");
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Vec2& p : mesh.vertices()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double tol = 1e-12 * std::max(xmax - xmin, ymax - ymin);
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    const Edge& edge = mesh.edge(static_cast<int>(i));
    if (!edge.on_boundary()) {
      if (edge.tag != BoundaryTag::interior) fail("edge " + std::to_string(i) + " has two elements but a boundary tag");
      continue;
    }
    if (edge.tag == BoundaryTag::slit_face) continue;
    const Vec2 a = mesh.vertex(edge.v[0]);
    const Vec2 b = mesh.vertex(edge.v[1]);
    const bool on_outer = (std::abs(a.x - xmin) < tol && std::abs(b.x - xmin) < tol) ||
                          (std::abs(a.x - xmax) < tol && std::abs(b.x - xmax) < tol) ||
                          (std::abs(a.y - ymin) < tol && std::abs(b.y - ymin) < tol) ||
                          (std::abs(a.y - ymax) < tol && std::abs(b.y - ymax) < tol);
    if (!on_outer) fail("one-sided edge " + std::to_string(i) + " lies inside the domain (hanging vertex)");
  }
  return report;
}

std::vector<SignConditionEntry> check_stiffness_sign_condition(const Mesh& mesh) {
  std::vector<double> a(mesh.num_edges(), 0.0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const ElementGeometry& g = mesh.geometry(static_cast<int>(e));
    const auto& edges = mesh.element_edges(static_cast<int>(e));
    for (int k = 0; k < 3; ++k) {
      // edge k joins local vertices k+1 and k+2
      const Vec2 gi = g.grad_lambda[static_cast<std::size_t>((k + 1) % 3)];
      const Vec2 gj = g.grad_lambda[static_cast<std::size_t>((k + 2) % 3)];
      a[static_cast<std::size_t>(edges[static_cast<std::size_t>(k)])] += g.area * dot(gi, gj);
    }
  }
  std::vector<SignConditionEntry> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 1e-12) {
      const Edge& edge = mesh.edge(static_cast<int>(i));
      out.push_back({edge.v[0], edge.v[1], a[i]});
    }
  }
  return out;
}

double min_angle(const Mesh& mesh) {
  double best = std::numbers::pi;
  for (const Triangle& t : mesh.elements()) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = mesh.vertex(t[static_cast<std::size_t>(k)]);
      const Vec2 a = mesh.vertex(t[static_cast<std::size_t>((k + 1) % 3)]) - p;
      const Vec2 b = mesh.vertex(t[static_cast<std::size_t>((k + 2) % 3)]) - p;
      const double c = std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0);
      best = std::min(best, std::acos(c));
    }
  }
  return best;
}

double shape_regularity(const Mesh& mesh) {
  double worst = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Triangle& t = mesh.element(static_cast<int>(e));
    const Vec2 a = mesh.vertex(t[0]), b = mesh.vertex(t[1]), c = mesh.vertex(t[2]);
    const double perimeter = norm(b - a) + norm(c - b) + norm(a - c);
    const double inradius = 2.0 * mesh.geometry(static_cast<int>(e)).area / perimeter;
    worst = std::max(worst, mesh.geometry(static_cast<int>(e)).diameter / (2.0 * inradius));
  }
  return worst;
}

int locate(const Mesh& mesh, Vec2 p, std::array<double, 3>* bary) {
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Triangle& t = mesh.element(static_cast<int>(e));
    const ElementGeometry& g = mesh.geometry(static_cast<int>(e));
    std::array<double, 3> l{};
    bool inside = true;
    for (int k = 0; k < 3; ++k) {
      // lambda_k is affine: 1 at vertex k, gradient grad_lambda[k]
      const Vec2 vk = mesh.vertex(t[static_cast<std::size_t>(k)]);
      l[static_cast<std::size_t>(k)] = 1.0 + dot(g.grad_lambda[static_cast<std::size_t>(k)], p - vk);
      if (l[static_cast<std::size_t>(k)] < -1e-12) inside = false;
    }
    if (inside) {
      if (bary) *bary = l;
      return static_cast<int>(e);
    }
  }
  return -1;
}

}  // namespace slfrac
