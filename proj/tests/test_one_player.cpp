#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "mpg/chains.hpp"
#include "mpg/generators.hpp"
#include "mpg/one_player.hpp"
#include "mpg/shapley.hpp"

using namespace mpg;
using namespace mpg::testing;

namespace {

// Random MAX-only game with strictly substochastic dyadic rows (a stopped
// problem with uniform escape probability 1/8 per step).
OnePlayerGame random_stopped(std::mt19937_64& rng, int n) {
  OnePlayerGame::Builder b(n);
  for (int i = 0; i < n; ++i) {
    int na = 1 + static_cast<int>(rng() % 2);
    for (int a = 0; a < na; ++a) {
      int k = 1 + static_cast<int>(rng() % 2);
      std::vector<TransitionEntry> row;
      std::vector<int> targets;
      while (static_cast<int>(targets.size()) < k) {
        int t = static_cast<int>(rng() % n);
        if (std::find(targets.begin(), targets.end(), t) == targets.end())
          targets.push_back(t);
      }
      std::sort(targets.begin(), targets.end());
      // Masses in units of 1/64, total 56/64 = 0.875.
      int remaining = 56;
      for (size_t t = 0; t < targets.size(); ++t) {
        int w = t + 1 == targets.size()
                    ? remaining
                    : 1 + static_cast<int>(rng() % (remaining - 1));
        remaining -= w;
        row.push_back({targets[t], w / 64.0});
      }
      b.add(i, static_cast<double>(rng() % 2001) / 1000.0 - 1.0,
            std::move(row));
    }
  }
  return b.build();
}

// Random stochastic MAX-only game (restriction of a random two-player one).
OnePlayerGame random_mdp(uint64_t seed) {
  Game g = gen_random_small(seed);
  return restrict_min(
      g, MinStrategy{std::vector<int>(static_cast<size_t>(g.num_states()), 0)});
}

}  // namespace

TEST_CASE("howard_stopped on a one-state contraction") {
  OnePlayerGame::Builder b(1);
  b.add(0, 1.0, {{0, 0.5}});
  StoppedProblem sp{b.build()};
  HowardResult res = howard_stopped(sp, MaxStrategy{{0}});
  CHECK(res.v[0] == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("howard_stopped solves the walkthrough stopped system") {
  // Fix the optimal MIN strategy, stop on the critical set {1,2,3,4}; the
  // remaining free coordinate satisfies
  //   w = (-1.5 + max(0, -1, -0.5, -1.5, 1 + w)) / 2  =>  w = -0.5.
  Game five = example_5node();
  OnePlayerGame g1 = restrict_min(five, MinStrategy{{1, 1, 3, 3, 3}});
  std::vector<double> u{0, 0, -0.5, -0.5, 0};
  auto [stopped, free_states] =
      build_stopped_problem(g1, {0, 1, 2, 3}, u);
  REQUIRE(free_states == std::vector<int>{4});
  HowardResult res =
      howard_stopped(stopped, lowest_index_strategy(stopped.game));
  CHECK(res.v[0] == doctest::Approx(-0.5).epsilon(1e-13));
}

TEST_CASE("howard_stopped matches value iteration") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + static_cast<int>(rng() % 4);
    OnePlayerGame g = random_stopped(rng, n);
    OnePlayerOptions opts;
    opts.check_properties = true;
    HowardResult res =
        howard_stopped(StoppedProblem{g}, lowest_index_strategy(g), opts);
    CHECK(res.violations.empty());
    std::vector<double> v(n, 0.0);
    for (int it = 0; it < 2000; ++it) v = apply_g(g, v);
    CHECK(sup_diff(res.v, v) <= 1e-9);
    // Fixed point within tolerance.
    CHECK(sup_diff(apply_g(g, res.v), res.v) <= 1e-10);
  }
}

TEST_CASE("howard_stopped rejects chains with internal final classes") {
  OnePlayerGame::Builder b(1);
  b.add(0, 1.0, {{0, 1.0}});
  StoppedProblem sp{b.build()};
  CHECK_THROWS_AS(howard_stopped(sp, MaxStrategy{{0}}), SolverError);
}

TEST_CASE("multichain_pi with a single action equals solve_eta_v") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + static_cast<int>(rng() % 4);
    OnePlayerGame::Builder b(n);
    for (int i = 0; i < n; ++i) {
      std::vector<TransitionEntry> row;
      int j = static_cast<int>(rng() % n);
      int j2 = static_cast<int>(rng() % n);
      if (j == j2)
        row = {{j, 1.0}};
      else
        row = {{j, 0.5}, {j2, 0.5}};
      b.add(i, static_cast<double>(rng() % 2001) / 1000.0 - 1.0,
            std::move(row));
    }
    OnePlayerGame g = b.build();
    OnePlayerSolution sol = multichain_pi(g, lowest_index_strategy(g));
    auto [P, r] = fix_pair(g, MaxStrategy{std::vector<int>(n, 0)});
    auto [eta, v] = solve_eta_v(P, r, minimal_final_indices(decompose(P)));
    CHECK(sup_diff(sol.eta, eta) == 0.0);
    CHECK(sup_diff(sol.v, v) == 0.0);
  }
}

TEST_CASE("multichain_pi on the walkthrough restriction") {
  Game five = example_5node();
  OnePlayerGame g0 = restrict_min(five, five_node_sigma0());
  OnePlayerOptions opts;
  opts.check_properties = true;
  OnePlayerSolution sol = multichain_pi(g0, lowest_index_strategy(g0), opts);
  CHECK(sol.violations.empty());
  for (double e : sol.eta) CHECK(std::fabs(e) <= 1e-12);
  // The bias is one valid solution of the pinned system.
  CHECK(residual(g0, HalfLine{sol.eta, sol.v}) <= 1e-12);
  auto [P, r] = fix_pair(g0, sol.delta);
  std::vector<int> S = minimal_final_indices(decompose(P));
  for (int s : S) CHECK(sol.v[s] == 0.0);
}

TEST_CASE("multichain_pi matches exhaustive strategy enumeration") {
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    OnePlayerGame g = random_mdp(seed);
    int n = g.num_states();
    OnePlayerOptions opts;
    opts.check_properties = true;
    OnePlayerSolution sol = multichain_pi(g, lowest_index_strategy(g), opts);
    CHECK(sol.violations.empty());

    std::vector<double> best(n, -1e300);
    std::vector<int> delta(n, 0);
    while (true) {
      auto [P, r] = fix_pair(g, MaxStrategy{delta});
      std::vector<double> eta = mean_payoff_fixed_pair(P, r);
      for (int i = 0; i < n; ++i) best[i] = std::max(best[i], eta[i]);
      int pos = n - 1;
      while (pos >= 0 && ++delta[pos] == g.num_actions(pos)) {
        delta[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
    CHECK(sup_diff(sol.eta, best) <= 1e-9);
    CHECK(residual(g, HalfLine{sol.eta, sol.v}) <= 1e-10);
  }
}

TEST_CASE("multichain_pi requires stochastic rows") {
  OnePlayerGame::Builder b(1);
  b.add(0, 1.0, {{0, 0.5}});
  OnePlayerGame g = b.build();
  CHECK_THROWS_AS(multichain_pi(g, MaxStrategy{{0}}), SolverError);
}
