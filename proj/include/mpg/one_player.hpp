#pragma once

#include <string>
#include <vector>

#include "mpg/chains.hpp"
#include "mpg/game.hpp"
#include "mpg/shapley.hpp"

namespace mpg {

class SolverError : public GameError {
 public:
  using GameError::GameError;
};

/// One-player problem restricted to free states, with boundary values folded
/// into the rewards. The induced operator must have no critical node: every
/// fixed-strategy chain is strictly substochastic or escapes.
struct StoppedProblem {
  OnePlayerGame game;
};

struct OnePlayerOptions {
  Tolerances tol;
  ChainSolveOptions chain;
  int max_iterations = 1000000;
  // When set, runtime property checks append human-readable findings to the
  // result's `violations`.
  bool check_properties = false;
};

struct HowardResult {
  std::vector<double> v;
  MaxStrategy delta;
  int iterations = 0;
  std::vector<std::string> violations;
};

struct OnePlayerSolution {
  std::vector<double> eta;
  std::vector<double> v;
  MaxStrategy delta;
  int iterations = 0;
  std::vector<std::string> violations;
};

/// Howard's policy iteration for a stopped (contracting) problem: returns the
/// unique fixed point of the operator together with a strategy attaining it.
/// Throws SolverError if a chain exposes a final class inside the free states
/// (signals a wrong critical set upstream).
HowardResult howard_stopped(const StoppedProblem& problem,
                            const MaxStrategy& delta0,
                            const OnePlayerOptions& opts = {});

/// Multichain mean-payoff policy iteration (Denardo-Fox scheme): returns
/// (eta, v) with eta = optimal mean payoff, v a bias pinned to zero on the
/// minimal state of each final class of the optimal chain.
OnePlayerSolution multichain_pi(const OnePlayerGame& g,
                                const MaxStrategy& delta0,
                                const OnePlayerOptions& opts = {});

MaxStrategy lowest_index_strategy(const OnePlayerGame& g);

}  // namespace mpg
