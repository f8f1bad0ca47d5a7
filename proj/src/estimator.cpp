#include "slfrac/estimator.hpp"

#include <cmath>

#include "slfrac/error.hpp"
#include "slfrac/quadrature.hpp"

namespace slfrac {

namespace {

double sum(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

}  // namespace

double ElementIndicators::global_eta() const { return std::sqrt(sum(eta_sq)); }
double ElementIndicators::global_eta_tilde() const { return std::sqrt(sum(eta_tilde_sq)); }
double ElementIndicators::global_eta_hat() const { return std::sqrt(sum(eta_hat_sq)); }

Vec2 outward_normal(const Mesh& mesh, int elem, int edge) {
  const Edge& ed = mesh.edge(edge);
  const Vec2 a = mesh.vertex(ed.v[0]);
  const Vec2 b = mesh.vertex(ed.v[1]);
  const Vec2 d = b - a;
  Vec2 n{d.y, -d.x};
  const double len = norm(n);
  n = (1.0 / len) * n;
  const Triangle& t = mesh.element(elem);
  for (int k : t) {
    if (k != ed.v[0] && k != ed.v[1]) {
      if (dot(n, mesh.vertex(k) - a) > 0.0) n = -1.0 * n;
      break;
    }
  }
  return n;
}

double jump_normal_gradient(const Mesh& mesh, const NodalField& w, int edge) {
  require_bound(w, mesh, "jump_normal_gradient");
  if (edge < 0 || static_cast<std::size_t>(edge) >= mesh.num_edges()) {
    throw InvalidInput("jump_normal_gradient: edge index out of range");
  }
  const Edge& ed = mesh.edge(edge);
  if (ed.on_boundary()) {
    return dot(element_gradient(mesh, ed.elem[0], w.values), outward_normal(mesh, ed.elem[0], edge));
  }
  const int hi = std::max(ed.elem[0], ed.elem[1]);
  const int lo = std::min(ed.elem[0], ed.elem[1]);
  const Vec2 n = outward_normal(mesh, hi, edge);
  return dot(element_gradient(mesh, hi, w.values) - element_gradient(mesh, lo, w.values), n);
}

ElementIndicators compute_indicators(const Mesh& mesh, const NodalField& u, const NodalField& v,
                                     const ModelParams& p, const IndicatorOptions& opt) {
  require_bound(u, mesh, "compute_indicators");
  require_bound(v, mesh, "compute_indicators");
  if (!opt.crack_edges.empty() && opt.crack_edges.size() != mesh.num_edges()) {
    throw MeshMismatch("compute_indicators: crack edge mask size");
  }
  const StrainLaw law(p);
  const double kappa = p.kappa;
  const double rho = p.rho();
  const double delta = p.delta();
  const std::size_t ne = mesh.num_elements();

  // edge jumps are shared by both neighbours
  std::vector<double> jump_u(mesh.num_edges()), jump_v(mesh.num_edges());
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    jump_u[i] = jump_normal_gradient(mesh, u, static_cast<int>(i));
    jump_v[i] = jump_normal_gradient(mesh, v, static_cast<int>(i));
  }

  ElementIndicators out;
  out.mesh_id = mesh.id();
  for (auto& t : out.tilde_terms) t.assign(ne, 0.0);
  for (auto& t : out.hat_terms) t.assign(ne, 0.0);
  out.eta_tilde_sq.assign(ne, 0.0);
  out.eta_hat_sq.assign(ne, 0.0);
  out.eta_sq.assign(ne, 0.0);

  for (std::size_t ei = 0; ei < ne; ++ei) {
    const int e = static_cast<int>(ei);
    const ElementGeometry& g = mesh.geometry(e);
    const Triangle& t = mesh.element(e);
    const Vec2 gu = element_gradient(mesh, e, u.values);
    const Vec2 gv = element_gradient(mesh, e, v.values);
    const double g2 = dot(gu, gu);
    const double gv2 = dot(gv, gv);
    const double guv = dot(gu, gv);
    const double h2 = g.diameter * g.diameter;
    const double h4 = h2 * h2;
    const std::array<double, 3> vk{v[static_cast<std::size_t>(t[0])], v[static_cast<std::size_t>(t[1])],
                                   v[static_cast<std::size_t>(t[2])]};

    double i1 = 0.0, i2 = 0.0, j1 = 0.0, j2 = 0.0;
    for (const TrianglePoint& q : triangle_rule()) {
      const auto& l = q.bary;
      const double vq = l[0] * vk[0] + l[1] * vk[1] + l[2] * vk[2];
      const double s = law.degradation(vq * vq) * g2;
      const double inv1 = law.inv_denom_pow(s);
      const double a1 = (1.0 - kappa) * inv1;
      i1 += q.weight * a1 * a1 * g2;
      const double a2 = 2.0 * (kappa - 1.0) * vq * guv * law.slope_factor(s) * law.inv_denom_pow2(s);
      i2 += q.weight * a2 * a2;
      const double b1 = (1.0 - kappa) * g2 * inv1;
      j1 += q.weight * b1 * b1;
      const double b2 = b1 * vq - delta;
      j2 += q.weight * b2 * b2;
    }
    out.tilde_terms[0][ei] = gv2 * gv2 * h4 * g.area * i1;
    out.tilde_terms[1][ei] = h2 * g.area * i2;
    out.hat_terms[0][ei] = gv2 * h4 * g.area * j1;
    out.hat_terms[1][ei] = h2 * g.area * j2;

    const auto& edges = mesh.element_edges(e);
    for (int k = 0; k < 3; ++k) {
      const int ed = edges[static_cast<std::size_t>(k)];
      const Edge& edge = mesh.edge(ed);
      const Vec2 a = mesh.vertex(edge.v[0]);
      const Vec2 b = mesh.vertex(edge.v[1]);
      const double he = norm(b - a);
      if (!is_dirichlet(edge.tag)) {
        const double ju = jump_u[static_cast<std::size_t>(ed)];
        if (ju != 0.0) {
          const double va = v[static_cast<std::size_t>(edge.v[0])];
          const double vb = v[static_cast<std::size_t>(edge.v[1])];
          double acc = 0.0;
          for (const EdgePoint& q : edge_rule()) {
            const double vq = (1.0 - q.s) * va + q.s * vb;
            const double c = law.degradation(vq * vq);
            const double w = c * law.inv_denom_pow(c * g2) * ju;
            acc += q.weight * w * w;
          }
          out.tilde_terms[2][ei] += he * he * acc;
        }
      }
      const bool crack = !opt.crack_edges.empty() && opt.crack_edges[static_cast<std::size_t>(ed)];
      if (!crack) {
        const double jv = jump_v[static_cast<std::size_t>(ed)];
        out.hat_terms[2][ei] += rho * rho * he * he * jv * jv;
      }
    }
    out.eta_tilde_sq[ei] = out.tilde_terms[0][ei] + out.tilde_terms[1][ei] + out.tilde_terms[2][ei];
    out.eta_hat_sq[ei] = out.hat_terms[0][ei] + out.hat_terms[1][ei] + out.hat_terms[2][ei];
    out.eta_sq[ei] = out.eta_tilde_sq[ei] + out.eta_hat_sq[ei];
  }
  return out;
}

NodalField ProbeSpace::transfer(const NodalField& coarse) const {
  std::vector<double> values = coarse.values;
  for (const RefinementResult& r : levels) values = prolongate(values, r);
  return NodalField(mesh(), std::move(values));
}

ProbeSpace make_probe_space(const Mesh& mesh, int levels) {
  if (levels < 1) throw InvalidInput("make_probe_space: at least one level required");
  ProbeSpace space;
  space.levels.push_back(refine_uniform(mesh));
  for (int i = 1; i < levels; ++i) space.levels.push_back(refine_uniform(space.levels.back().mesh));
  return space;
}

double gradient_norm(const Mesh& mesh, const NodalField& w) {
  require_bound(w, mesh, "gradient_norm");
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Vec2 g = element_gradient(mesh, static_cast<int>(e), w.values);
    s += mesh.geometry(static_cast<int>(e)).area * dot(g, g);
  }
  return std::sqrt(s);
}

DualProbe residual_dual_probe(const Mesh& mesh, const NodalField& u, const NodalField& v, const ProbeSpace& probe,
                              const NodalField& psi, const NodalField& phi, const ModelParams& p,
                              const ElementIndicators& eta, std::span<const std::uint8_t> crack_mask) {
  require_bound(u, mesh, "residual_dual_probe");
  require_bound(v, mesh, "residual_dual_probe");
  if (eta.mesh_id != mesh.id()) throw MeshMismatch("residual_dual_probe: indicators belong to another mesh");
  const Mesh& fine = probe.mesh();
  const NodalField uf = probe.transfer(u);
  const NodalField vf = probe.transfer(v);
  DualProbe r;
  r.lhs = std::abs(dir_derivative_A(vf, uf, psi, fine, p, false) +
                   dir_derivative_B(uf, vf, phi, fine, p, false, crack_mask));
  r.rhs_tilde = eta.global_eta_tilde() * gradient_norm(fine, psi);
  r.rhs_hat = eta.global_eta_hat() * gradient_norm(fine, phi);
  return r;
}

}  // namespace slfrac
