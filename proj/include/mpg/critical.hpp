#pragma once

#include <utility>
#include <vector>

#include "mpg/game.hpp"
#include "mpg/one_player.hpp"

namespace mpg {

/// Per-state finite sets of sparse stochastic row vectors (the optimal rows
/// B-tilde at a harmonic vector); sets may be empty.
struct RowFamily {
  int n = 0;
  std::vector<std::vector<std::vector<TransitionEntry>>> rows;  // [state][k]
};

/// Critical graph as a sorted arc list plus its node set and SCC partition.
struct CriticalResult {
  std::vector<std::pair<int, int>> arcs;   // sorted, unique
  std::vector<int> critical_nodes;         // sorted
  std::vector<std::vector<int>> sccs;      // partition of critical_nodes

  bool operator==(const CriticalResult& o) const { return arcs == o.arcs; }
};

/// Assembles a CriticalResult (node set and SCC partition) from an arc list.
CriticalResult make_critical_result(std::vector<std::pair<int, int>> arcs,
                                    int n);

/// Rows within eps of optimal at the harmonic vector u:
/// B_tilde_i = {b : |G(u; i, b) - u_i| <= eps}. Throws if u is not harmonic
/// within eps.
RowFamily tilde_family(const OnePlayerGame& g, std::span<const double> u,
                       double eps);

/// Critical graph of the convex operator described by the family: iterative
/// peeling of final classes of the support graphs.
CriticalResult critical_graph(const RowFamily& family);

/// Nonlinear spectral projection of the super-harmonic vector u: the unique
/// harmonic vector agreeing with u on the critical set C; free coordinates
/// come from Howard's algorithm on the stopped problem.
std::vector<double> spectral_projection(const OnePlayerGame& g,
                                        const std::vector<int>& C,
                                        std::span<const double> u,
                                        const OnePlayerOptions& opts = {});

/// The stopped problem on the complement of C with boundary values u folded
/// into rewards, plus the local->global state map. Exposed for tests.
std::pair<StoppedProblem, std::vector<int>> build_stopped_problem(
    const OnePlayerGame& g, const std::vector<int>& C,
    std::span<const double> u);

}  // namespace mpg
