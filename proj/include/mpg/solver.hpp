#pragma once

#include <map>
#include <string>
#include <vector>

#include "mpg/critical.hpp"
#include "mpg/game.hpp"
#include "mpg/one_player.hpp"
#include "mpg/shapley.hpp"

namespace mpg {

struct SolveOptions {
  Tolerances tol;
  ChainSolveOptions chain;
  int max_outer = 1000;
  int max_inner = 1000000;
  // Skip the spectral projection at degenerate iterations (the cycling demo).
  bool naive = false;
  // Disable warm starts and the single-SCC shortcut, for reproducing
  // published traces step by step.
  bool strict_trace = false;
  bool warm_start = true;
  bool check_properties = false;
  // Replaces the bias produced by the inner solver at the given outer
  // iteration (0 = the initial solve). Each vector must be a valid bias for
  // the current strategy's operator; used with strict_trace to follow traces
  // whose inner solver normalized biases differently.
  std::map<int, std::vector<double>> injected_bias;
};

enum class SolveStatus { kConverged, kCycleDetected, kOuterCapExceeded };

struct IterationTrace {
  double eta_change = 0.0;
  bool degenerate = false;
  bool strongly_degenerate = false;
  int critical_scc_count = 0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::kConverged;
  HalfLine halfline;
  MinStrategy sigma;
  MaxStrategy delta;  // one entry per state (strategy of the inner problem)
  int outer_iterations = 0;
  long inner_iterations = 0;
  int degenerate_count = 0;
  int strongly_degenerate_count = 0;
  double residual = 0.0;
  std::vector<IterationTrace> trace;
  std::vector<std::string> warnings;
  std::vector<std::string> property_violations;
  double wall_seconds = 0.0;
  int cycle_iteration = -1;  // naive mode: outer index where sigma repeated
};

/// Policy iteration over the MIN player with degenerate iterations resolved
/// by spectral projection.
SolveReport solve(const Game& game, const MinStrategy& sigma0,
                  const SolveOptions& opts = {});

MinStrategy lowest_index_min_strategy(const Game& game);

/// Uniform random starting strategy, for benchmark diversity. Deterministic
/// given the seed.
MinStrategy random_min_strategy(const Game& game, uint64_t seed);

bool check_invariant_halfline(const Game& game, const HalfLine& hl,
                              const Tolerances& tol = {});

}  // namespace mpg
