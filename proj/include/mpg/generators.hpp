#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mpg/critical.hpp"
#include "mpg/game.hpp"

namespace mpg {

struct RichmanConfig {
  int n = 0;
  int out_degree = 10;
  uint64_t seed = 0;
};

struct CatMouseConfig {
  int grid = 65;        // points per axis, odd
  double speed = 1.0;   // cat speed bound
  double freeze_radius = 0.1;
};

/// Tug-of-war variant on a random graph: each node gets `out_degree` distinct
/// out-arcs with i.i.d. rewards in {0,1}. MIN action a picks arc j_a, MAX
/// action b picks arc j_b; reward (r_a + r_b)/2, transition half/half.
/// Deterministic per seed (std::mt19937_64, modulo reduction).
Game gen_richman(const RichmanConfig& cfg);

/// Like gen_richman but over an explicit arc structure: arcs[i] lists the
/// out-neighbors of node i, rewards[i][k] the weight of the k-th arc.
Game richman_from_graph(const std::vector<std::vector<int>>& arcs,
                        const std::vector<std::vector<double>>& rewards);

/// The 5-node complete-graph instance whose policy iteration exhibits a
/// strongly degenerate step.
Game example_5node();

struct CatMouseInstance {
  Game game;
  double dt = 0.0;  // time step; mean payoff per unit time is eta/dt
  std::vector<std::array<double, 2>> coords;  // state -> (x1, x2)
};

/// Pursuit-evasion on the relative state x = pursuer - evader in
/// [-0.5, 0.5]^2, payoff |x|^2, evader frozen inside the ball of radius
/// `freeze_radius` around the origin. Uniform-time-step Kushner-Dupuis
/// discretization on an m x m grid. MIN = pursuer with per-axis moves in
/// {0, +-speed}, MAX = evader with per-axis moves in {0, +-1}; components
/// that would leave the square are removed at boundary states.
CatMouseInstance gen_catmouse(const CatMouseConfig& cfg);

/// Small random game for oracle cross-checks: up to 5 states, 2 actions per
/// side, 3 arcs per row; probabilities are multiples of 1/64 summing to one
/// exactly, rewards uniform in [-1, 1]. Deterministic per seed.
Game gen_random_small(uint64_t seed);

/// Small random row family (up to 6 states, up to 3 rows each, occasionally
/// empty) with exactly-stochastic dyadic rows. Deterministic per seed.
RowFamily gen_random_family(uint64_t seed);

}  // namespace mpg
