#include <cmath>
#include <random>

#include "doctest.h"
#include "slfrac/assembly.hpp"
#include "slfrac/driver.hpp"
#include "slfrac/error.hpp"
#include "test_util.hpp"

using namespace slfrac;
using namespace slfrac::test;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double residual_ratio(const CsrMatrix& a, const std::vector<double>& x, const std::vector<double>& b) {
  std::vector<double> ax(b.size());
  a.multiply(x, ax);
  double r = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    r += (ax[i] - b[i]) * (ax[i] - b[i]);
    nb += b[i] * b[i];
  }
  return std::sqrt(r / nb);
}

}  // namespace

TEST_SUITE("assembly") {
  TEST_CASE("cg on the identity returns the right-hand side") {
    const CsrMatrix id = csr_from_dense({1, 0, 0, 0, 1, 0, 0, 0, 1}, 3);
    const std::vector<double> b{1.5, -2.0, 3.25};
    CHECK(max_abs_diff(pcg(id, b, 1e-14), b) < 1e-14);
  }

  TEST_CASE("cg on a 2x2 system") {
    const CsrMatrix a = csr_from_dense({2, 1, 1, 2}, 2);
    const auto x = pcg(a, {3, 3}, 1e-14);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("cg meets the relative residual on a random SPD matrix") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    const std::size_t n = 50;
    std::vector<double> g(n * n), a(n * n, 0.0), b(n);
    for (double& x : g) x = nd(rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) a[i * n + j] += g[k * n + i] * g[k * n + j];
      }
      a[i * n + i] += 1.0;
    }
    for (double& x : b) x = nd(rng);
    const CsrMatrix m = csr_from_dense(a, n);
    CHECK(residual_ratio(m, pcg(m, b, 1e-10), b) <= 1e-10);
  }

  TEST_CASE("cg reports an indefinite matrix") {
    const CsrMatrix a = csr_from_dense({1, 0, 0, -1}, 2);
    CHECK_THROWS_AS(pcg(a, {1, 1}, 1e-10), SingularSystem);
  }

  TEST_CASE("u-system with beta = 0 and v = 1 is the Laplace stiffness") {
    const Mesh m = build_unit_square_with_slit(4, 0.5);
    ModelParams p;
    p.beta = 0.0;
    p.kappa = 0.3;
    const ConstraintSet bc = u_boundary_constraints(m, 0.1, 1.0);
    const SparseSystem sys = assemble_u_system(m, NodalField::constant(m, 1.0), NodalField::constant(m, 0.0), bc, p);
    CsrMatrix lap = pattern_from_mesh(m);
    for (int e = 0; e < static_cast<int>(m.num_elements()); ++e) {
      const auto& g = m.geometry(e);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) lap.add(m.element(e)[a], m.element(e)[b], g.area * dot(g.grad_lambda[a], g.grad_lambda[b]));
      }
    }
    REQUIRE(lap.val.size() == sys.raw_matrix.val.size());
    CHECK(max_abs_diff(lap.val, sys.raw_matrix.val) < 1e-13);
  }

  TEST_CASE("u-system at zero stress scales with the degradation") {
    const Mesh m = build_unit_square_with_slit(2, 0.5);
    ModelParams p;
    p.kappa = 0.1;
    const ConstraintSet bc = u_boundary_constraints(m, 0.1, 1.0);
    const NodalField zero = NodalField::constant(m, 0.0);
    const auto full = assemble_u_system(m, NodalField::constant(m, 1.0), zero, bc, p, true);
    const auto half = assemble_u_system(m, NodalField::constant(m, 0.5), zero, bc, p, true);
    const double ratio = (0.9 * 0.25 + 0.1) / 1.0;
    for (std::size_t k = 0; k < full.raw_matrix.val.size(); ++k) {
      CHECK(half.raw_matrix.val[k] == doctest::Approx(ratio * full.raw_matrix.val[k]).epsilon(1e-12));
    }
  }

  TEST_CASE("assembled systems are symmetric with a positive diagonal") {
    std::mt19937_64 rng(8);
    const Mesh m = build_unit_square_with_slit(4, 0.5);
    ModelParams p;
    const NodalField u = random_field(m, rng, -1.0, 1.0);
    const NodalField v = random_field(m, rng, 0.0, 1.0);
    for (bool lumped : {true, false}) {
      const auto us = assemble_u_system(m, v, u, u_boundary_constraints(m, 0.2, 1.0), p, lumped);
      const auto vs = assemble_v_system(m, u, v, ConstraintSet{}, p, lumped);
      CHECK(us.matrix.is_symmetric(1e-13));
      CHECK(vs.matrix.is_symmetric(1e-13));
      for (double d : us.matrix.diagonal()) CHECK(d > 0.0);
      for (double d : vs.matrix.diagonal()) CHECK(d > 0.0);
    }
  }

  TEST_CASE("v-system without reaction or constraints is singular") {
    const Mesh m = build_unit_square(2);
    const NodalField zero = NodalField::constant(m, 0.0);
    CHECK_THROWS_AS(assemble_v_system(m, zero, NodalField::constant(m, 1.0), ConstraintSet{}, ModelParams{}),
                    SingularSystem);
  }

  TEST_CASE("conflicting constraints are rejected") {
    ConstraintSet c;
    c.add(3, 1.0);
    c.add(3, 1.0);
    CHECK(c.size() == 1);
    CHECK_THROWS_AS(c.add(3, 2.0), InvalidInput);
  }

  TEST_CASE("clamp_v") {
    const Mesh m = build_unit_square(1);
    NodalField v(m, {5e-5, 1.2, 0.5, 1e-4, 0.99999});
    const NodalField c = clamp_v(v, 1e-4);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 1.0);
    CHECK(c[2] == 0.5);
    CHECK(c[3] == 0.0);
    CHECK(c[4] == 0.99999);
  }

  TEST_CASE("linear problem converges in one Picard iteration") {
    const Mesh m = build_unit_square_with_slit(4, 0.5);
    ModelParams p;
    p.beta = 0.0;
    PicardOptions opt;
    const auto r = solve_u_picard(m, NodalField::constant(m, 1.0), u_boundary_constraints(m, 0.3, 1.0), p, opt);
    CHECK(r.iterations == 1);
    CHECK(r.converged);
  }

  TEST_CASE("patch test: affine Dirichlet data is reproduced") {
    const Mesh m = square_all_dirichlet(4);
    for (double beta : {0.0, 1.0}) {
      ModelParams p;
      p.beta = beta;
      PicardOptions opt;
      opt.tol_lin = 1e-13;
      opt.tol_picard = 1e-12;
      const auto r = solve_u_picard(m, NodalField::constant(m, 1.0), dirichlet_data(m, [](Vec2 x) { return 0.3 * x.x; }), p, opt);
      const NodalField exact = sample(m, [](Vec2 x) { return 0.3 * x.x; });
      CHECK(max_abs_diff(r.u.values, exact.values) < 1e-10);
    }
  }

  TEST_CASE("Picard at the first load step of the reference configuration") {
    const Mesh m = build_unit_square_with_slit(16, 0.5);
    ModelParams p;
    PicardOptions opt;
    const auto r = solve_u_picard(m, NodalField::constant(m, 1.0), u_boundary_constraints(m, 0.01, 1.0), p, opt);
    CHECK(r.converged);
    CHECK(r.iterations <= 50);
    REQUIRE(!r.history.empty());
    CHECK(r.history.back() <= opt.tol_picard);
  }

  TEST_CASE("converged u is a discrete critical point") {
    const Mesh m = build_unit_square_with_slit(8, 0.5);
    std::mt19937_64 rng(2);
    ModelParams p;
    const NodalField v = random_field(m, rng, 0.5, 1.0);
    PicardOptions opt;
    opt.tol_picard = 1e-12;
    opt.tol_lin = 1e-13;
    const auto r = solve_u_picard(m, v, u_boundary_constraints(m, 0.05, 1.0), p, opt);
    NodalField e = NodalField::constant(m, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < m.num_vertices(); ++i) {
      if (m.dirichlet_vertices()[i]) continue;
      e[i] = 1.0;
      worst = std::max(worst, std::abs(dir_derivative_A(v, r.u, e, m, p, true)));
      e[i] = 0.0;
    }
    CHECK(worst < 1e-9);
  }

  TEST_CASE("box solve stays in bounds and keeps constraints") {
    const Mesh m = build_unit_square_with_slit(4, 0.5);
    std::mt19937_64 rng(4);
    ModelParams p;
    p.epsilon = 0.2;
    const NodalField u = random_field(m, rng, -3.0, 3.0);
    ConstraintSet cons;
    cons.add(0, 0.0);
    const auto sys = assemble_v_system(m, u, NodalField::constant(m, 1.0), cons, p);
    BoxSolveStats stats;
    const auto x = solve_sparse_box(sys, 0.0, 1.0, 1e-12, &stats);
    CHECK(x[0] == 0.0);
    for (double y : x) {
      CHECK(y >= 0.0);
      CHECK(y <= 1.0);
    }
  }
}
