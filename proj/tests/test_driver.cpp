#include <cmath>

#include "doctest.h"
#include "slfrac/driver.hpp"
#include "slfrac/error.hpp"
#include "test_util.hpp"

using namespace slfrac;
using namespace slfrac::test;

TEST_SUITE("driver") {
  TEST_CASE("boundary load") {
    CHECK(boundary_load(0.0, Vec2{0.25, 1.0}, 1.0) == 0.0);
    CHECK(boundary_load(0.0, Vec2{0.75, 1.0}, 1.0) == 0.0);
    CHECK(boundary_load(0.6, Vec2{0.25, 1.0}, 1.0) == doctest::Approx(-0.6));
    CHECK(boundary_load(0.6, Vec2{0.75, 1.0}, 2.0) == doctest::Approx(1.2));
    CHECK(boundary_load(0.6, BoundaryTag::dirichlet_top_right, 1.0) == doctest::Approx(0.6));
    CHECK_THROWS_AS(boundary_load(0.6, Vec2{0.5, 1.0}, 1.0), InvalidInput);
    CHECK_THROWS_AS(boundary_load(0.6, Vec2{0.25, 0.5}, 1.0), InvalidInput);
    CHECK_THROWS_AS(boundary_load(0.6, BoundaryTag::neumann_outer, 1.0), InvalidInput);
  }

  TEST_CASE("boundary constraints cover both slit faces at the mouth") {
    const Mesh m = build_unit_square_with_slit(4, 0.5);
    const ConstraintSet bc = u_boundary_constraints(m, 0.1, 1.0);
    int mouth = 0;
    double sum = 0.0;
    for (const auto& [i, val] : bc.values()) {
      const Vec2 x = m.vertex(i);
      CHECK(x.y == 1.0);
      if (x.x == 0.5) {
        ++mouth;
        sum += val;
      }
    }
    CHECK(mouth == 2);
    CHECK(sum == doctest::Approx(0.0));
  }

  TEST_CASE("crack state update pins small values") {
    const Mesh m = build_unit_square(2);
    NodalField v = NodalField::constant(m, 1.0);
    CrackState s = update_crack_state(m, v, CrackState::empty(m), 1e-2, 1e-4);
    CHECK(s.num_pinned() == 0);
    v[3] = 5e-3;
    s = update_crack_state(m, v, s, 1e-2, 1e-4);
    CHECK(s.num_pinned() == 1);
    CHECK(s.pinned[3] == 1);
    // pins persist once v recovers
    v[3] = 1.0;
    s = update_crack_state(m, v, s, 1e-2, 1e-4);
    CHECK(s.pinned[3] == 1);
    CHECK(s.zero_mask()[3] == 1);
  }

  TEST_CASE("crack edges need both endpoints cracked") {
    const Mesh m = build_unit_square(1);
    NodalField v = NodalField::constant(m, 1.0);
    v[0] = 0.0;
    v[4] = 0.0;
    const CrackState s = update_crack_state(m, v, CrackState::empty(m), 1e-2, 1e-4);
    const auto edges = s.crack_edges(m);
    int count = 0;
    for (int i = 0; i < static_cast<int>(m.num_edges()); ++i) {
      if (!edges[i]) continue;
      ++count;
      const auto& e = m.edge(i).v;
      CHECK(((e[0] == 0 && e[1] == 4) || (e[0] == 4 && e[1] == 0)));
    }
    CHECK(count == 1);
  }

  TEST_CASE("crack state transfer through bisection") {
    const Mesh m = build_unit_square(1);
    CrackState s = CrackState::empty(m);
    s.pinned[0] = 1;
    s.pinned[4] = 1;
    s.pinned[1] = 1;
    const RefinementResult r = refine_uniform(m);
    const CrackState t = transfer_crack_state(s, r);
    CHECK(t.pinned.size() == r.mesh.num_vertices());
    for (std::size_t k = 0; k < r.new_vertex_parents.size(); ++k) {
      const auto [a, b] = r.new_vertex_parents[k];
      const std::size_t id = r.old_vertex_count + k;
      CHECK(t.pinned[id] == (t.pinned[a] && t.pinned[b] ? 1 : 0));
    }
  }

  TEST_CASE("epsilon selection") {
    const Mesh m = build_unit_square(8);
    CHECK(select_epsilon(m, EpsilonMode::fixed, 10.0) == doctest::Approx(1.25));
  }

  TEST_CASE("one step without load keeps the intact state") {
    SimulationConfig cfg;
    cfg.steps = 1;
    cfg.load_rate = 0.0;
    cfg.n_initial = 4;
    const auto r = run_quasi_static(cfg);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].bulk == 0.0);
    CHECK(r.records[0].surface == 0.0);
    CHECK(r.records[0].total == 0.0);
    for (double x : r.final_state.v.values) CHECK(x == 1.0);
  }

  TEST_CASE("surface energy does not decrease over a damaging run") {
    SimulationConfig cfg;
    cfg.model.beta = 0.0;
    cfg.n_initial = 4;
    cfg.steps = 3;
    cfg.dt = 0.3;
    cfg.load_rate = 2.0;
    cfg.adapt.max_refines = 2;
    cfg.adapt.max_elements = 3000;
    std::vector<double> surface;
    RunObserver obs;
    obs.on_step = [&](const EnergyRecord& rec, const StepResult&, const DiscreteState& st) {
      surface.push_back(rec.surface);
      for (double x : st.v.values) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
      }
    };
    const auto r = run_quasi_static(cfg, obs);
    REQUIRE(surface.size() == 3);
    CHECK(surface.back() > 0.0);
    for (std::size_t j = 1; j < surface.size(); ++j) CHECK(surface[j] >= surface[j - 1] - 1e-10);
    for (std::size_t j = 0; j < r.records.size(); ++j) {
      CHECK(r.records[j].total == doctest::Approx(r.records[j].bulk + r.records[j].surface));
    }
  }

  TEST_CASE("invalid simulation settings") {
    SimulationConfig cfg;
    cfg.steps = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = SimulationConfig{};
    cfg.n_initial = 5;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = SimulationConfig{};
    cfg.algorithm = 4;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  }
}
