#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "mpg/generators.hpp"
#include "mpg/oracles.hpp"
#include "mpg/shapley.hpp"
#include "mpg/solver.hpp"

using namespace mpg;
using namespace mpg::testing;

TEST_CASE("tug-of-war on a single node is the constant game") {
  Game g = richman_from_graph({{0}}, {{0.75}});
  SolveReport rep = solve(g, lowest_index_min_strategy(g));
  CHECK(rep.halfline.eta[0] == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("tug-of-war instances are deterministic and well-shaped") {
  RichmanConfig cfg;
  cfg.n = 50;
  cfg.out_degree = 10;
  cfg.seed = 7;
  Game a = gen_richman(cfg);
  Game b = gen_richman(cfg);
  CHECK(serialize_game_text(a) == serialize_game_text(b));
  for (int i = 0; i < a.num_states(); ++i) {
    CHECK(a.num_min_actions(i) == 10);
    for (int aa = 0; aa < 10; ++aa) CHECK(a.num_max_actions(i, aa) == 10);
  }
  cfg.seed = 8;
  CHECK(serialize_game_text(gen_richman(cfg)) != serialize_game_text(a));
}

TEST_CASE("tug-of-war operator matches the half-sum formula") {
  // apply_f(v)_i = (max_j (r_ij + v_j) + min_j (r_ij + v_j)) / 2.
  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rng() % 6);
    std::vector<std::vector<int>> arcs(n);
    std::vector<std::vector<double>> rw(n);
    for (int i = 0; i < n; ++i) {
      int d = 1 + static_cast<int>(rng() % n);
      for (int j = 0; j < n && static_cast<int>(arcs[i].size()) < d; ++j)
        if (rng() % 2 || n - j <= d - static_cast<int>(arcs[i].size()))
          arcs[i].push_back(j);
      for (size_t k = 0; k < arcs[i].size(); ++k)
        rw[i].push_back(static_cast<double>(rng() % 2));
    }
    Game g = richman_from_graph(arcs, rw);
    std::vector<double> v = random_vector(rng, n);
    std::vector<double> fv = apply_f(g, v);
    for (int i = 0; i < n; ++i) {
      double lo = 1e300, hi = -1e300;
      for (size_t k = 0; k < arcs[i].size(); ++k) {
        double x = rw[i][k] + v[arcs[i][k]];
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      worst = std::max(worst, std::fabs(fv[i] - 0.5 * (hi + lo)));
    }
  }
  // The encoding evaluates (r_a + r_b)/2 + (v_a + v_b)/2 rather than the
  // literal half-sum, so agreement is to rounding, not bitwise.
  CHECK(worst <= 1e-12);
}

TEST_CASE("the walkthrough instance has the documented rewards") {
  Game g = example_5node();
  CHECK(g.num_states() == 5);
  // MIN arc 1->2 (a=1) against MAX arc 1->1 (b=0): (-1 + 1)/2 = 0.
  CHECK(g.reward(0, 1, 0) == 0.0);
  auto row = g.row(0, 1, 0);
  REQUIRE(row.size() == 2);
  CHECK(row[0].target == 0);
  CHECK(row[0].prob == 0.5);
  CHECK(row[1].target == 1);
  CHECK(row[1].prob == 0.5);
  // Node 5's own arc weights.
  CHECK(g.reward(4, 4, 4) == 1.0);
  CHECK(g.reward(4, 1, 1) == -1.0);
  // Solved from scratch: zero mean payoff.
  SolveReport rep = solve(g, lowest_index_min_strategy(g));
  for (double e : rep.halfline.eta) CHECK(std::fabs(e) <= 1e-12);
}

TEST_CASE("pursuit grid instances are well-formed") {
  CatMouseConfig cfg;
  cfg.grid = 9;
  cfg.speed = 1.0;
  CatMouseInstance inst = gen_catmouse(cfg);
  const Game& g = inst.game;
  const int m = cfg.grid;
  CHECK(g.num_states() == m * m);
  CHECK(inst.dt == doctest::Approx((1.0 / (m - 1)) / 4.0));

  for (int i = 0; i < g.num_states(); ++i) {
    int ix = i % m, iy = i / m;
    double x1 = inst.coords[i][0], x2 = inst.coords[i][1];
    CHECK(x1 == doctest::Approx(ix / double(m - 1) - 0.5));
    CHECK(x2 == doctest::Approx(iy / double(m - 1) - 0.5));
    bool frozen = x1 * x1 + x2 * x2 < 0.01;
    for (int a = 0; a < g.num_min_actions(i); ++a) {
      if (frozen) CHECK(g.num_max_actions(i, a) == 1);
      for (int b = 0; b < g.num_max_actions(i, a); ++b) {
        double sum = 0.0;
        for (const auto& e : g.row(i, a, b)) {
          CHECK(e.prob >= 0.0);
          sum += e.prob;
          // No wraparound: targets one grid step away at most.
          int tx = e.target % m, ty = e.target / m;
          CHECK(std::abs(tx - ix) + std::abs(ty - iy) <= 1);
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-15);
        CHECK(g.reward(i, a, b) ==
              doctest::Approx((x1 * x1 + x2 * x2) * inst.dt));
      }
    }
  }

  // Interior states have the full 9x9 action grid; corners are clipped.
  int center = (m / 2) * m + m / 2;
  CHECK(g.num_min_actions(center) == 9);
  CHECK(g.num_min_actions(0) == 4);
  CHECK(!(0.25 + 0.25 < 0.01));  // corners are not frozen
  CHECK(g.num_max_actions(0, 0) == 4);
}

TEST_CASE("pursuit drift rows match the scheme") {
  // Full-speed rightward drift (1 + speed, 0): half the mass moves one cell
  // right, half stays.
  CatMouseConfig cfg;
  cfg.grid = 9;
  cfg.speed = 1.0;
  CatMouseInstance inst = gen_catmouse(cfg);
  const Game& g = inst.game;
  const int m = cfg.grid;
  int state = 1 * m + 1;  // interior, outside the freeze ball
  // MIN actions enumerate (c1, c2) in {-1,0,1}^2 low-to-high; (+1, 0) is
  // a = 7. MAX actions likewise; mouse (+1, 0) is b = 7.
  int a = 7, b = 7;
  auto row = g.row(state, a, b);
  REQUIRE(row.size() == 2);
  CHECK(row[0].target == state);
  CHECK(row[0].prob == 0.5);
  CHECK(row[1].target == state + 1);
  CHECK(row[1].prob == 0.5);
}

TEST_CASE("coarse pursuit solve tracks value iteration") {
  CatMouseConfig cfg;
  cfg.grid = 9;
  cfg.speed = 1.0;
  CatMouseInstance inst = gen_catmouse(cfg);
  SolveReport rep = solve(inst.game, lowest_index_min_strategy(inst.game));
  CHECK(rep.status == SolveStatus::kConverged);
  CHECK(rep.residual <= 1e-12);
  std::vector<double> vi = value_iteration_slope(inst.game, 4000);
  CHECK(sup_diff(rep.halfline.eta, vi) <= 1e-3);
}

TEST_CASE("pursuit generator rejects bad configurations") {
  CatMouseConfig cfg;
  cfg.grid = 8;
  CHECK_THROWS_AS(gen_catmouse(cfg), GameError);
  cfg.grid = 9;
  cfg.speed = 0.0;
  CHECK_THROWS_AS(gen_catmouse(cfg), GameError);
}

TEST_CASE("random small instances are exactly stochastic") {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    Game g = gen_random_small(seed);
    CHECK(g.num_states() <= 5);
    for (int i = 0; i < g.num_states(); ++i) {
      CHECK(g.num_min_actions(i) <= 2);
      for (int a = 0; a < g.num_min_actions(i); ++a)
        for (int b = 0; b < g.num_max_actions(i, a); ++b) {
          double sum = 0.0;
          for (const auto& e : g.row(i, a, b)) sum += e.prob;
          CHECK(sum == 1.0);
        }
    }
    CHECK(serialize_game_text(gen_random_small(seed)) ==
          serialize_game_text(g));
  }
}
