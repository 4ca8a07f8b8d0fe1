#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "mpg/game.hpp"
#include "mpg/generators.hpp"
#include "mpg/shapley.hpp"

using namespace mpg;
using namespace mpg::testing;

TEST_CASE("parse minimal one-state instance") {
  Game g = parse_game_text("zsg 1 1\n0 0 0 2 0:1\n");
  CHECK(g.num_states() == 1);
  CHECK(g.num_min_actions(0) == 1);
  CHECK(g.num_max_actions(0, 0) == 1);
  CHECK(g.reward(0, 0, 0) == 2.0);
  auto row = g.row(0, 0, 0);
  REQUIRE(row.size() == 1);
  CHECK(row[0].target == 0);
  CHECK(row[0].prob == 1.0);
}

TEST_CASE("parser skips comments and blank lines") {
  Game g = parse_game_text(
      "# a comment\n"
      "zsg 1 2\n"
      "\n"
      "0 0 0 1 1:1   # go right\n"
      "1 0 0 -1 0:0.5 1:0.5\n");
  CHECK(g.num_states() == 2);
  CHECK(g.reward(0, 0, 0) == 1.0);
  CHECK(g.row(1, 0, 0).size() == 2);
}

TEST_CASE("serialize/parse round trip is the identity") {
  Game g = example_5node();
  std::string text = serialize_game_text(g);
  Game h = parse_game_text(text);
  CHECK(serialize_game_text(h) == text);
  // Canonical form of non-canonical input: reparse of the serialization is a
  // fixed point even when the original text had different ordering.
  std::string shuffled =
      "zsg 1 2\n"
      "1 0 0 0.25 1:1\n"
      "0 0 1 -0.5 0:0.5 1:0.5\n"
      "0 0 0 1 0:1\n";
  Game s = parse_game_text(shuffled);
  CHECK(serialize_game_text(parse_game_text(serialize_game_text(s))) ==
        serialize_game_text(s));
}

TEST_CASE("round trip preserves random instances exactly") {
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    Game g = gen_random_small(seed);
    Game h = parse_game_text(serialize_game_text(g));
    REQUIRE(h.num_states() == g.num_states());
    for (int i = 0; i < g.num_states(); ++i) {
      REQUIRE(h.num_min_actions(i) == g.num_min_actions(i));
      for (int a = 0; a < g.num_min_actions(i); ++a) {
        REQUIRE(h.num_max_actions(i, a) == g.num_max_actions(i, a));
        for (int b = 0; b < g.num_max_actions(i, a); ++b) {
          CHECK(h.reward(i, a, b) == g.reward(i, a, b));
          auto r1 = g.row(i, a, b), r2 = h.row(i, a, b);
          REQUIRE(r1.size() == r2.size());
          for (size_t k = 0; k < r1.size(); ++k) {
            CHECK(r1[k].target == r2[k].target);
            CHECK(r1[k].prob == r2[k].prob);
          }
        }
      }
    }
  }
}

TEST_CASE("parser rejects malformed input") {
  CHECK_THROWS_AS(parse_game_text(""), ParseError);
  CHECK_THROWS_AS(parse_game_text("zsg 2 1\n0 0 0 1 0:1\n"), ParseError);
  CHECK_THROWS_AS(parse_game_text("zsg 1 0\n"), ParseError);
  // Row sum 1.1 beyond tolerance.
  CHECK_THROWS_AS(parse_game_text("zsg 1 2\n0 0 0 1 0:0.6 1:0.5\n"
                                  "1 0 0 0 1:1\n"),
                  ParseError);
  // Target out of range.
  CHECK_THROWS_AS(parse_game_text("zsg 1 1\n0 0 0 1 1:1\n"), ParseError);
  // Duplicate target within a row.
  CHECK_THROWS_AS(parse_game_text("zsg 1 1\n0 0 0 1 0:0.5 0:0.5\n"),
                  ParseError);
  // Negative probability.
  CHECK_THROWS_AS(parse_game_text("zsg 1 2\n0 0 0 1 0:1.5 1:-0.5\n"
                                  "1 0 0 0 1:1\n"),
                  ParseError);
  // Malformed transition token.
  CHECK_THROWS_AS(parse_game_text("zsg 1 1\n0 0 0 1 0;1\n"), ParseError);
  // Missing fields.
  CHECK_THROWS_AS(parse_game_text("zsg 1 1\n0 0 0 1\n"), ParseError);
}

TEST_CASE("builder rejects structural violations") {
  // Non-contiguous MIN actions.
  {
    Game::Builder b(1);
    b.add(0, 0, 0, 0.0, {{0, 1.0}});
    b.add(0, 2, 0, 0.0, {{0, 1.0}});
    CHECK_THROWS_AS(b.build(), GameError);
  }
  // Non-contiguous MAX actions.
  {
    Game::Builder b(1);
    b.add(0, 0, 0, 0.0, {{0, 1.0}});
    b.add(0, 0, 2, 0.0, {{0, 1.0}});
    CHECK_THROWS_AS(b.build(), GameError);
  }
  // Duplicate record.
  {
    Game::Builder b(1);
    b.add(0, 0, 0, 0.0, {{0, 1.0}});
    b.add(0, 0, 0, 1.0, {{0, 1.0}});
    CHECK_THROWS_AS(b.build(), GameError);
  }
  // State without actions.
  {
    Game::Builder b(2);
    b.add(0, 0, 0, 0.0, {{0, 1.0}});
    CHECK_THROWS_AS(b.build(), GameError);
  }
}

TEST_CASE("restrict_min reproduces the walkthrough coordinate") {
  // Fixing the start strategy, coordinate 5 of the one-player operator is
  // v -> (-1 + v_2 + max(v_1, -1+v_2, v_3, -1+v_4, 1+v_5)) / 2.
  Game game = example_5node();
  OnePlayerGame g = restrict_min(game, five_node_sigma0());
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v = random_vector(rng, 5);
    double expected =
        0.5 * (-1 + v[1] +
               std::max({v[0], -1 + v[1], v[2], -1 + v[3], 1 + v[4]}));
    CHECK(apply_g(g, v)[4] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("restrict_min of a single-action game keeps the operator") {
  Game g = parse_game_text(
      "zsg 1 2\n0 0 0 1 0:0.5 1:0.5\n0 0 1 0 1:1\n1 0 0 -1 0:1\n");
  OnePlayerGame r = restrict_min(g, MinStrategy{{0, 0}});
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v = random_vector(rng, 2);
    std::vector<double> fv = apply_f(g, v);
    std::vector<double> gv = apply_g(r, v);
    CHECK(fv[0] == gv[0]);
    CHECK(fv[1] == gv[1]);
  }
}

TEST_CASE("restrict then evaluate equals apply_F at sigma, bitwise") {
  std::mt19937_64 rng(11);
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    Game game = gen_random_small(seed);
    int n = game.num_states();
    MinStrategy sigma{std::vector<int>(n)};
    for (int i = 0; i < n; ++i)
      sigma.sigma[i] = static_cast<int>(rng() % game.num_min_actions(i));
    OnePlayerGame r = restrict_min(game, sigma);
    std::vector<double> v = random_vector(rng, n);
    std::vector<double> gv = apply_g(r, v);
    for (int i = 0; i < n; ++i)
      CHECK(gv[i] == apply_F(game, v, i, sigma.sigma[i]));
  }
}

TEST_CASE("validate_min_strategy rejects bad strategies") {
  Game g = example_5node();
  CHECK_THROWS_AS(validate_min_strategy(g, MinStrategy{{0, 0}}), GameError);
  CHECK_THROWS_AS(validate_min_strategy(g, MinStrategy{{0, 0, 0, 0, 5}}),
                  GameError);
  CHECK_NOTHROW(validate_min_strategy(g, five_node_sigma0()));
}
