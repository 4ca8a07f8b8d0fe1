#pragma once

#include <cstdint>
#include <vector>

#include "mpg/critical.hpp"
#include "mpg/game.hpp"

namespace mpg {

/// f^T(0) / T; converges to the mean payoff at rate O(1/T).
std::vector<double> value_iteration_slope(const Game& game, long T);

/// Exhaustive min over MIN strategies of the componentwise max over MAX
/// strategies of the fixed-pair mean payoff. Throws when the strategy-pair
/// count exceeds `cap`.
std::vector<double> brute_force_value(const Game& game, double cap = 1e6);

/// Critical graph by enumeration: per state, every nonempty subset of the
/// family averaged uniformly; the union of final-class subgraphs over all
/// selections. Limited to n <= 8 and |P_i| <= 4.
CriticalResult brute_force_critical(const RowFamily& family);

}  // namespace mpg
