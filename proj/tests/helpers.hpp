#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mpg/game.hpp"

namespace mpg::testing {

inline std::vector<double> random_vector(std::mt19937_64& rng, int n,
                                         double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v)
    x = scale * (static_cast<double>(rng() % 20001) / 10000.0 - 1.0);
  return v;
}

inline double sup_diff(const std::vector<double>& a,
                       const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// The starting MIN strategy of the 5-node walkthrough: arcs
// 1->2, 2->2, 3->4, 4->4, 5->2 in 1-based node labels.
inline MinStrategy five_node_sigma0() { return MinStrategy{{1, 1, 3, 3, 1}}; }

}  // namespace mpg::testing
