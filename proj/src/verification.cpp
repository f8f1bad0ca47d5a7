#include "slfrac/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "slfrac/adaptivity.hpp"
#include "slfrac/error.hpp"

namespace slfrac {

std::string oracle_csv_header() { return "name,samples,max_error,tolerance,pass"; }

std::string to_csv(const OracleReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%zu,%.6e,%.6e,%d", r.name.c_str(), r.samples, r.max_error, r.tolerance,
                r.pass ? 1 : 0);
  return buf;
}

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// All compositions of `total` into `parts` nonnegative integers.
void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.push_back(k);
    compositions(total - k, parts - 1, cur, out);
    cur.pop_back();
  }
}

// Grundmann-Moller rule on the n-simplex; weights as fractions of its volume.
std::pair<std::vector<std::vector<double>>, std::vector<double>> grundmann_moller(int n, int s) {
  if (s < 0) throw InvalidInput("grundmann_moller: s must be nonnegative");
  const int d = 2 * s + 1;
  std::vector<std::vector<double>> pts;
  std::vector<double> w;
  for (int i = 0; i <= s; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    const double denom = d + n - 2 * i;
    // the rule integrates over a simplex of volume 1/n!; rescale to fractions
    const double wi = sign * std::pow(2.0, -2 * s) * std::pow(denom, d) / (factorial(i) * factorial(d + n - i)) *
                      factorial(n);
    std::vector<std::vector<int>> betas;
    std::vector<int> cur;
    compositions(s - i, n + 1, cur, betas);
    for (const auto& beta : betas) {
      std::vector<double> x(static_cast<std::size_t>(n + 1));
      for (int j = 0; j <= n; ++j) x[static_cast<std::size_t>(j)] = (2.0 * beta[static_cast<std::size_t>(j)] + 1.0) / denom;
      pts.push_back(std::move(x));
      w.push_back(wi);
    }
  }
  return {pts, w};
}

}  // namespace

SimplexRule grundmann_moller_triangle(int s) {
  auto [pts, w] = grundmann_moller(2, s);
  SimplexRule r;
  for (std::size_t i = 0; i < pts.size(); ++i) r.points.push_back({pts[i][0], pts[i][1], pts[i][2]});
  r.weights = std::move(w);
  return r;
}

std::vector<std::pair<double, double>> grundmann_moller_segment(int s) {
  auto [pts, w] = grundmann_moller(1, s);
  std::vector<std::pair<double, double>> r;
  for (std::size_t i = 0; i < pts.size(); ++i) r.emplace_back(pts[i][1], w[i]);
  return r;
}

double quadrature_oracle(const std::function<double(Vec2)>& f, const Mesh& mesh, int degree) {
  if (degree < 0 || degree > 8) throw InvalidInput("quadrature_oracle: degree must lie in [0, 8]");
  const SimplexRule rule = grundmann_moller_triangle(std::max(0, (degree) / 2));
  double total = 0.0;
  for (const Triangle& t : mesh.elements()) {
    const Vec2 a = mesh.vertex(t[0]), b = mesh.vertex(t[1]), c = mesh.vertex(t[2]);
    const double area = 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      acc += rule.weights[q] * f(l[0] * a + l[1] * b + l[2] * c);
    }
    total += area * acc;
  }
  return total;
}

GradientSweep gradient_sweep(const Mesh& mesh, const NodalField& u, const NodalField& v, const NodalField& psi,
                             const NodalField& phi, const ModelParams& p, const std::vector<double>& t_values,
                             bool lumped) {
  GradientSweep out;
  const double j0 = total_energy(u, v, mesh, p, lumped).total;
  const double d = dir_derivative_A(v, u, psi, mesh, p, lumped) + dir_derivative_B(u, v, phi, mesh, p, lumped);
  for (double t : t_values) {
    NodalField ut = u, vt = v;
    for (std::size_t i = 0; i < u.size(); ++i) {
      ut[i] += t * psi[i];
      vt[i] += t * phi[i];
    }
    const double jt = total_energy(ut, vt, mesh, p, lumped).total;
    out.t.push_back(t);
    out.error.push_back(std::abs((jt - j0) / t - d));
  }
  const double scale = std::max(std::abs(j0), 1.0);
  out.exact = std::all_of(out.error.begin(), out.error.end(), [&](double e) { return e <= 1e-9 * scale; });
  // least-squares slope of log error against log t
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    if (!(out.error[i] > 0.0)) continue;
    const double x = std::log(out.t[i]), y = std::log(out.error[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++n;
  }
  out.order = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
  return out;
}

OracleReport gradient_check(const Mesh& mesh, const NodalField& u, const NodalField& v, const NodalField& psi,
                            const NodalField& phi, const ModelParams& p, const std::vector<double>& t_values,
                            bool lumped) {
  const GradientSweep s = gradient_sweep(mesh, u, v, psi, phi, p, t_values, lumped);
  OracleReport r;
  r.name = "gradient_check";
  r.samples = t_values.size();
  // order deficit 1 - order, so pass iff the observed order is at least 0.9
  r.tolerance = 0.1;
  r.max_error = s.exact ? 0.0 : std::max(0.0, 1.0 - s.order);
  r.pass = r.max_error <= r.tolerance;
  return r;
}

std::size_t marking_oracle(std::span<const double> eta_sq, double theta) {
  const std::size_t n = eta_sq.size();
  if (n > 12) throw InvalidInput("marking_oracle: at most 12 indicators");
  double total = 0.0;
  for (double x : eta_sq) total += x;
  if (total == 0.0) return 0;
  std::size_t best = n;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto card = static_cast<std::size_t>(__builtin_popcount(mask));
    if (card >= best) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s += eta_sq[i];
    }
    if (s >= theta * total) best = card;
  }
  return best;
}

namespace {

struct LocalP1 {
  Vec2 x[3];
  double area;
  double h;
  Vec2 grad[3];   // barycentric gradients by inverting the affine map
};

LocalP1 local_p1(const Mesh& mesh, int e) {
  const Triangle& t = mesh.element(e);
  LocalP1 l;
  for (int k = 0; k < 3; ++k) l.x[k] = mesh.vertex(t[static_cast<std::size_t>(k)]);
  const double j11 = l.x[1].x - l.x[0].x, j12 = l.x[2].x - l.x[0].x;
  const double j21 = l.x[1].y - l.x[0].y, j22 = l.x[2].y - l.x[0].y;
  const double det = j11 * j22 - j12 * j21;
  l.area = 0.5 * std::abs(det);
  // rows of J^{-1} are the gradients of lambda_1, lambda_2
  l.grad[1] = {j22 / det, -j12 / det};
  l.grad[2] = {-j21 / det, j11 / det};
  l.grad[0] = {-l.grad[1].x - l.grad[2].x, -l.grad[1].y - l.grad[2].y};
  l.h = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 d = l.x[(k + 1) % 3] - l.x[k];
    l.h = std::max(l.h, std::sqrt(d.x * d.x + d.y * d.y));
  }
  return l;
}

Vec2 grad_of(const LocalP1& l, const double (&w)[3]) {
  return {w[0] * l.grad[0].x + w[1] * l.grad[1].x + w[2] * l.grad[2].x,
          w[0] * l.grad[0].y + w[1] * l.grad[1].y + w[2] * l.grad[2].y};
}

}  // namespace

ElementIndicators oracle_indicators(const Mesh& mesh, const NodalField& u, const NodalField& v, const ModelParams& p,
                                    std::span<const std::uint8_t> crack_vertex) {
  require_bound(u, mesh, "oracle_indicators");
  require_bound(v, mesh, "oracle_indicators");
  const double a = p.alpha, b = std::pow(p.beta, p.alpha), k = p.kappa;
  const double rho = p.lambda_c * p.epsilon / p.c_w;
  const double delta = p.lambda_c / (p.c_w * p.epsilon);
  auto denom = [&](double t2) { return 1.0 + b * std::pow(t2, a); };
  const SimplexRule tri = grundmann_moller_triangle(4);
  const auto seg = grundmann_moller_segment(4);
  const std::size_t ne = mesh.num_elements();

  // element lists per vertex pair, by brute force over all elements
  std::map<std::pair<int, int>, std::vector<int>> owners;
  for (std::size_t e = 0; e < ne; ++e) {
    const Triangle& t = mesh.element(static_cast<int>(e));
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const int x = std::min(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)]);
        const int y = std::max(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)]);
        owners[{x, y}].push_back(static_cast<int>(e));
      }
    }
  }
  auto field_grad = [&](int e, const NodalField& f) {
    const Triangle& t = mesh.element(e);
    const double w[3] = {f[static_cast<std::size_t>(t[0])], f[static_cast<std::size_t>(t[1])],
                         f[static_cast<std::size_t>(t[2])]};
    return grad_of(local_p1(mesh, e), w);
  };
  // normal of edge (x, y) pointing away from element e
  auto normal_out = [&](int e, int x, int y) {
    const Vec2 px = mesh.vertex(x), py = mesh.vertex(y);
    const double len = std::hypot(py.x - px.x, py.y - px.y);
    Vec2 n{(py.y - px.y) / len, -(py.x - px.x) / len};
    const LocalP1 l = local_p1(mesh, e);
    const Vec2 c{(l.x[0].x + l.x[1].x + l.x[2].x) / 3.0, (l.x[0].y + l.x[1].y + l.x[2].y) / 3.0};
    if ((c.x - px.x) * n.x + (c.y - px.y) * n.y > 0.0) n = {-n.x, -n.y};
    return n;
  };
  auto jump = [&](const std::vector<int>& own, int x, int y, const NodalField& f) {
    if (own.size() == 1) {
      const Vec2 g = field_grad(own[0], f);
      const Vec2 n = normal_out(own[0], x, y);
      return g.x * n.x + g.y * n.y;
    }
    const int hi = std::max(own[0], own[1]), lo = std::min(own[0], own[1]);
    const Vec2 n = normal_out(hi, x, y);
    const Vec2 gh = field_grad(hi, f), gl = field_grad(lo, f);
    return (gh.x - gl.x) * n.x + (gh.y - gl.y) * n.y;
  };

  ElementIndicators out;
  out.mesh_id = mesh.id();
  for (auto& t : out.tilde_terms) t.assign(ne, 0.0);
  for (auto& t : out.hat_terms) t.assign(ne, 0.0);
  for (std::size_t ei = 0; ei < ne; ++ei) {
    const int e = static_cast<int>(ei);
    const Triangle& t = mesh.element(e);
    const LocalP1 l = local_p1(mesh, e);
    const double vk[3] = {v[static_cast<std::size_t>(t[0])], v[static_cast<std::size_t>(t[1])], v[static_cast<std::size_t>(t[2])]};
    const Vec2 gu = field_grad(e, u), gv = field_grad(e, v);
    const double g2 = gu.x * gu.x + gu.y * gu.y;
    const double gv_abs = std::sqrt(gv.x * gv.x + gv.y * gv.y);
    double i1 = 0, i2 = 0, j1 = 0, j2 = 0;
    for (std::size_t q = 0; q < tri.points.size(); ++q) {
      const auto& lam = tri.points[q];
      const double vq = lam[0] * vk[0] + lam[1] * vk[1] + lam[2] * vk[2];
      const double t2 = ((1.0 - k) * vq * vq + k) * g2;
      const double dd = denom(t2);
      const double e1 = 1.0 / std::pow(dd, 1.0 / a + 1.0);
      const double e2 = 1.0 / std::pow(dd, 1.0 / a + 2.0);
      // |(1-k) grad u / D^{1/a+1}|^2
      i1 += tri.weights[q] * std::pow((1.0 - k) * e1, 2) * g2;
      const double s = 2.0 * (k - 1.0) * vq * (gv.x * gu.x + gv.y * gu.y) * (1.0 - a * b * std::pow(t2, a)) * e2;
      i2 += tri.weights[q] * s * s;
      j1 += tri.weights[q] * std::pow((1.0 - k) * g2 * e1, 2);
      j2 += tri.weights[q] * std::pow((1.0 - k) * g2 * vq * e1 - delta, 2);
    }
    out.tilde_terms[0][ei] = std::pow(gv_abs, 4) * std::pow(l.h, 4) * l.area * i1;
    out.tilde_terms[1][ei] = l.h * l.h * l.area * i2;
    out.hat_terms[0][ei] = gv_abs * gv_abs * std::pow(l.h, 4) * l.area * j1;
    out.hat_terms[1][ei] = l.h * l.h * l.area * j2;
    for (int i = 0; i < 3; ++i) {
      const int x = std::min(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>((i + 1) % 3)]);
      const int y = std::max(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>((i + 1) % 3)]);
      const auto& own = owners.at({x, y});
      const Vec2 px = mesh.vertex(x), py = mesh.vertex(y);
      const double he = std::hypot(py.x - px.x, py.y - px.y);
      const auto tag = mesh.boundary().find(edge_key(x, y));
      const bool dirichlet = tag != mesh.boundary().end() && is_dirichlet(tag->second);
      if (!dirichlet) {
        const double ju = jump(own, x, y, u);
        double acc = 0.0;
        for (const auto& [s, w] : seg) {
          const double vq = (1.0 - s) * v[static_cast<std::size_t>(x)] + s * v[static_cast<std::size_t>(y)];
          const double c = (1.0 - k) * vq * vq + k;
          acc += w * std::pow(c * ju / std::pow(denom(c * g2), 1.0 / a + 1.0), 2);
        }
        out.tilde_terms[2][ei] += he * he * acc;
      }
      const bool crack = !crack_vertex.empty() && crack_vertex[static_cast<std::size_t>(x)] &&
                         crack_vertex[static_cast<std::size_t>(y)];
      if (!crack) {
        const double jv = jump(own, x, y, v);
        double acc = 0.0;
        for (const auto& [s, w] : seg) acc += w * rho * rho * he * jv * jv;
        out.hat_terms[2][ei] += he * acc;
      }
    }
  }
  out.eta_tilde_sq.assign(ne, 0.0);
  out.eta_hat_sq.assign(ne, 0.0);
  out.eta_sq.assign(ne, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    out.eta_tilde_sq[e] = out.tilde_terms[0][e] + out.tilde_terms[1][e] + out.tilde_terms[2][e];
    out.eta_hat_sq[e] = out.hat_terms[0][e] + out.hat_terms[1][e] + out.hat_terms[2][e];
    out.eta_sq[e] = out.eta_tilde_sq[e] + out.eta_hat_sq[e];
  }
  return out;
}

double indicator_deviation(const ElementIndicators& a, const ElementIndicators& b) {
  if (a.eta_sq.size() != b.eta_sq.size()) throw MeshMismatch("indicator_deviation: size mismatch");
  double worst = 0.0;
  auto compare = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double top = 0.0;
    for (double t : y) top = std::max(top, std::abs(t));
    const double floor = std::max(top * 1e-12, 1e-300);
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max(worst, std::abs(x[i] - y[i]) / std::max(std::abs(y[i]), floor));
    }
  };
  for (int i = 0; i < 3; ++i) {
    compare(a.tilde_terms[static_cast<std::size_t>(i)], b.tilde_terms[static_cast<std::size_t>(i)]);
    compare(a.hat_terms[static_cast<std::size_t>(i)], b.hat_terms[static_cast<std::size_t>(i)]);
  }
  compare(a.eta_sq, b.eta_sq);
  return worst;
}

namespace {

NodalField random_field(const Mesh& mesh, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> x(mesh.num_vertices());
  for (double& y : x) y = d(rng);
  return NodalField(mesh, std::move(x));
}

}  // namespace

std::vector<OracleReport> run_verification_suite(std::uint64_t seed) {
  std::vector<OracleReport> reports;
  std::mt19937_64 rng(seed);

  {
    const Mesh m = build_unit_square(4);
    const double one = quadrature_oracle([](Vec2) { return 1.0; }, m, 0);
    const double xy = quadrature_oracle([](Vec2 p) { return p.x * p.y; }, m, 2);
    OracleReport r{"quadrature_monomials", 2, std::max(std::abs(one - 1.0), std::abs(xy - 0.25)), 1e-14, false};
    r.pass = r.max_error <= r.tolerance;
    reports.push_back(r);
  }

  {
    // about 200 elements, random fields away from the box edges
    const Mesh m = build_unit_square_with_slit(8, 0.5);
    const std::vector<double> ts{1e-2, 1e-3, 1e-4, 1e-5};
    for (double beta : {0.0, 1.0}) {
      ModelParams p;
      p.beta = beta;
      p.epsilon = 0.25;
      const NodalField u = random_field(m, rng, -1.0, 1.0);
      const NodalField v = random_field(m, rng, 0.2, 1.0);
      NodalField psi = random_field(m, rng, -1.0, 1.0);
      for (std::size_t i = 0; i < psi.size(); ++i) {
        if (m.dirichlet_vertices()[i]) psi[i] = 0.0;
      }
      const NodalField phi = random_field(m, rng, -1.0, 1.0);
      for (bool lumped : {false, true}) {
        OracleReport r = gradient_check(m, u, v, psi, phi, p, ts, lumped);
        r.name = std::string("gradient_order_beta") + (beta == 0.0 ? "0" : "1") + (lumped ? "_lumped" : "");
        reports.push_back(r);
      }
    }
  }

  {
    std::uniform_int_distribution<int> size(1, 12);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::size_t mismatches = 0;
    for (int i = 0; i < 50; ++i) {
      std::vector<double> eta(static_cast<std::size_t>(size(rng)));
      for (double& e : eta) e = val(rng);
      const double theta = val(rng) * 0.99 + 0.01;
      if (dorfler_mark(eta, theta).size() != marking_oracle(eta, theta)) ++mismatches;
    }
    OracleReport r{"marking_minimality", 50, static_cast<double>(mismatches), 0.0, mismatches == 0};
    reports.push_back(r);
  }

  {
    const Mesh m = build_unit_square_with_slit(8, 0.5);
    ModelParams p;
    p.beta = 0.0;
    p.kappa = 1e-2;
    p.epsilon = 0.3;
    const NodalField u = random_field(m, rng, -1.0, 1.0);
    const NodalField v = random_field(m, rng, 0.0, 1.0);
    const double dev = indicator_deviation(compute_indicators(m, u, v, p), oracle_indicators(m, u, v, p));
    OracleReport r{"estimator_oracle_beta0", m.num_elements(), dev, 1e-10, dev <= 1e-10};
    reports.push_back(r);
  }
  return reports;
}

}  // namespace slfrac
