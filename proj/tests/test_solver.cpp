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

TEST_CASE("one-state games solve to the minimax reward") {
  Game g = parse_game_text(
      "zsg 1 1\n"
      "0 0 0 3 0:1\n"
      "0 0 1 -1 0:1\n"
      "0 1 0 2 0:1\n"
      "0 1 1 5 0:1\n");
  SolveReport rep = solve(g, lowest_index_min_strategy(g));
  CHECK(rep.status == SolveStatus::kConverged);
  // min(max(3,-1), max(2,5)) = 3.
  CHECK(rep.halfline.eta[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(rep.halfline.v[0] == 0.0);
  CHECK(rep.residual <= 1e-12);
}

TEST_CASE("random starting strategies are deterministic and reach the value") {
  Game five = example_5node();
  MinStrategy a = random_min_strategy(five, 7);
  CHECK(a.sigma == random_min_strategy(five, 7).sigma);
  CHECK(a.sigma != random_min_strategy(five, 8).sigma);
  for (int i = 0; i < five.num_states(); ++i) {
    CHECK(a.sigma[i] >= 0);
    CHECK(a.sigma[i] < five.num_min_actions(i));
  }
  for (uint64_t s : {7ull, 8ull, 9ull}) {
    SolveReport rep = solve(five, random_min_strategy(five, s));
    CHECK(rep.status == SolveStatus::kConverged);
    for (double e : rep.halfline.eta) CHECK(std::fabs(e) <= 1e-12);
  }
}

TEST_CASE("the walkthrough game solves through one strongly degenerate step") {
  Game five = example_5node();
  SolveReport rep = solve(five, five_node_sigma0());
  CHECK(rep.status == SolveStatus::kConverged);
  for (double e : rep.halfline.eta) CHECK(std::fabs(e) <= 1e-12);
  CHECK(rep.sigma.sigma == std::vector<int>{1, 1, 3, 3, 3});
  CHECK(rep.strongly_degenerate_count == 1);
  CHECK(rep.residual <= 1e-12);
  CHECK(check_invariant_halfline(five, rep.halfline));
}

TEST_CASE("strict trace with the published bias reproduces the final bias") {
  Game five = example_5node();
  SolveOptions opts;
  opts.strict_trace = true;
  opts.injected_bias[0] = {0, 0, -0.5, -0.5, 0};
  SolveReport rep = solve(five, five_node_sigma0(), opts);
  CHECK(rep.status == SolveStatus::kConverged);
  std::vector<double> want{0, 0, -0.5, -0.5, -0.5};
  CHECK(sup_diff(rep.halfline.v, want) <= 1e-12);
  CHECK(rep.strongly_degenerate_count == 1);
}

TEST_CASE("naive mode cycles on the walkthrough traces") {
  Game five = example_5node();
  SolveOptions opts;
  opts.naive = true;
  opts.strict_trace = true;
  opts.injected_bias[0] = {0, 0, -0.5, -0.5, 0};
  opts.injected_bias[1] = {0, 0, 0.5, 0.5, 0.5};
  SolveReport rep = solve(five, five_node_sigma0(), opts);
  CHECK(rep.status == SolveStatus::kCycleDetected);
  CHECK(rep.cycle_iteration == 2);
  CHECK(rep.sigma.sigma == five_node_sigma0().sigma);
}

TEST_CASE("invalid injected biases are rejected") {
  Game five = example_5node();
  SolveOptions opts;
  opts.injected_bias[0] = {1, 2, 3, 4, 5};
  CHECK_THROWS_AS(solve(five, five_node_sigma0(), opts), SolverError);
  opts.injected_bias[0] = {0, 0};
  CHECK_THROWS_AS(solve(five, five_node_sigma0(), opts), SolverError);
}

TEST_CASE("random games agree with the brute-force oracle") {
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    Game g = gen_random_small(seed);
    SolveOptions opts;
    opts.check_properties = true;
    SolveReport rep = solve(g, lowest_index_min_strategy(g), opts);
    CHECK(rep.status == SolveStatus::kConverged);
    CHECK(rep.residual <= 1e-9);
    CHECK(rep.property_violations.empty());
    std::vector<double> want = brute_force_value(g);
    CHECK(sup_diff(rep.halfline.eta, want) <= 1e-9);
  }
}

TEST_CASE("warm starts do not change the solution") {
  for (uint64_t seed = 100; seed <= 130; ++seed) {
    Game g = gen_random_small(seed);
    SolveOptions cold;
    cold.warm_start = false;
    SolveOptions warm;
    warm.warm_start = true;
    SolveReport a = solve(g, lowest_index_min_strategy(g), cold);
    SolveReport b = solve(g, lowest_index_min_strategy(g), warm);
    CHECK(sup_diff(a.halfline.eta, b.halfline.eta) <= 1e-10);
    CHECK(a.residual <= 1e-10);
    CHECK(b.residual <= 1e-10);
  }
}

TEST_CASE("the SOR backend matches the direct backend on a large instance") {
  // Regression: overrelaxed transient sweeps used to diverge to non-finite
  // values on barely leaking blocks of this instance and slip through the
  // convergence test, corrupting the policy improvement.
  RichmanConfig cfg;
  cfg.n = 1000;
  cfg.out_degree = 10;
  cfg.seed = 1;
  Game g = gen_richman(cfg);
  SolveOptions sor;
  sor.chain.linear_method = LinearMethod::kSor;
  SolveReport a = solve(g, lowest_index_min_strategy(g), sor);
  SolveReport b = solve(g, lowest_index_min_strategy(g));
  CHECK(a.status == SolveStatus::kConverged);
  for (double v : a.halfline.v) CHECK(std::isfinite(v));
  CHECK(a.residual <= 1e-12);
  CHECK(sup_diff(a.halfline.eta, b.halfline.eta) <= 1e-8);
}

TEST_CASE("naive mode still converges on generic instances") {
  int converged = 0;
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    Game g = gen_random_small(seed);
    SolveOptions naive;
    naive.naive = true;
    SolveReport rep = solve(g, lowest_index_min_strategy(g), naive);
    if (rep.status != SolveStatus::kConverged) continue;
    ++converged;
    SolveReport def = solve(g, lowest_index_min_strategy(g));
    CHECK(sup_diff(rep.halfline.eta, def.halfline.eta) <= 1e-9);
  }
  CHECK(converged >= 30);
}

TEST_CASE("check_invariant_halfline") {
  Game five = example_5node();
  HalfLine good{{0, 0, 0, 0, 0}, {0, 0, -0.5, -0.5, -0.5}};
  CHECK(check_invariant_halfline(five, good));

  // Zero game: the zero half-line is invariant.
  Game zero = parse_game_text(
      "zsg 1 2\n"
      "0 0 0 0 0:0.5 1:0.5\n"
      "1 0 0 0 0:1\n");
  CHECK(check_invariant_halfline(zero, HalfLine{{0, 0}, {0, 0}}));

  // Perturbed solutions fail.
  HalfLine bad = good;
  bad.v[2] += 1e-3;
  CHECK(!check_invariant_halfline(five, bad));
  HalfLine bad2 = good;
  bad2.eta[0] += 1e-3;
  CHECK(!check_invariant_halfline(five, bad2));
}

TEST_CASE("solver reports are internally consistent") {
  Game five = example_5node();
  SolveReport rep = solve(five, five_node_sigma0());
  CHECK(rep.outer_iterations == static_cast<int>(rep.trace.size()) + 1);
  int deg = 0, strong = 0;
  for (const auto& t : rep.trace) {
    deg += t.degenerate;
    strong += t.strongly_degenerate;
  }
  CHECK(rep.degenerate_count == deg);
  CHECK(rep.strongly_degenerate_count == strong);
  CHECK(rep.wall_seconds >= 0.0);
  CHECK(rep.inner_iterations >= rep.outer_iterations);
}
