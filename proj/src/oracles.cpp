#include "mpg/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "mpg/chains.hpp"
#include "mpg/shapley.hpp"

namespace mpg {

std::vector<double> value_iteration_slope(const Game& game, long T) {
  if (T < 1) throw GameError("value_iteration_slope needs T >= 1");
  std::vector<double> v(game.num_states(), 0.0);
  for (long t = 0; t < T; ++t) v = apply_f(game, v);
  for (double& x : v) x /= static_cast<double>(T);
  return v;
}

std::vector<double> brute_force_value(const Game& game, double cap) {
  const int n = game.num_states();
  // The inner best response is a per-sigma MDP enumerated on its own, so the
  // cap bounds each player's strategy count separately rather than their
  // product.
  double pairs = 0.0;
  {
    double outer = 1.0;
    for (int i = 0; i < n; ++i) outer *= game.num_min_actions(i);
    double max_inner = 1.0;
    for (int i = 0; i < n; ++i) {
      int widest = 0;
      for (int a = 0; a < game.num_min_actions(i); ++a)
        widest = std::max(widest, game.num_max_actions(i, a));
      max_inner *= widest;
    }
    pairs = std::max(outer, max_inner);
  }
  if (pairs > cap)
    throw GameError("brute_force_value: strategy count " +
                    std::to_string(pairs) + " exceeds cap");

  ChainSolveOptions chain;
  chain.final_method = FinalClassMethod::kMethodB;
  chain.linear_method = LinearMethod::kDirect;

  std::vector<double> value(n, 0.0);
  std::vector<int> sigma(n, 0);
  bool first_sigma = true;
  while (true) {
    // Componentwise best response of MAX by full enumeration of delta.
    std::vector<double> best(n, -std::numeric_limits<double>::infinity());
    std::vector<int> delta(n, 0);
    while (true) {
      SparseMatrix P;
      P.n = n;
      P.row_ptr.assign(n + 1, 0);
      std::vector<double> r(n);
      for (int i = 0; i < n; ++i) {
        r[i] = game.reward(i, sigma[i], delta[i]);
        for (const auto& e : game.row(i, sigma[i], delta[i])) {
          P.col.push_back(e.target);
          P.val.push_back(e.prob);
        }
        P.row_ptr[i + 1] = static_cast<int64_t>(P.col.size());
      }
      std::vector<double> eta = mean_payoff_fixed_pair(P, r, chain);
      for (int i = 0; i < n; ++i) best[i] = std::max(best[i], eta[i]);

      int pos = n - 1;
      while (pos >= 0 &&
             ++delta[pos] == game.num_max_actions(pos, sigma[pos])) {
        delta[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
    for (int i = 0; i < n; ++i)
      value[i] = first_sigma ? best[i] : std::min(value[i], best[i]);
    first_sigma = false;

    int pos = n - 1;
    while (pos >= 0 && ++sigma[pos] == game.num_min_actions(pos)) {
      sigma[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return value;
}

CriticalResult brute_force_critical(const RowFamily& family) {
  const int n = family.n;
  if (n > 8) throw GameError("brute_force_critical: too many states");
  for (const auto& rows : family.rows)
    if (rows.size() > 4)
      throw GameError("brute_force_critical: family too large");

  // Odometer over nonempty subsets per state (one dummy choice when empty).
  std::vector<int> num_choices(n);
  for (int i = 0; i < n; ++i) {
    int k = static_cast<int>(family.rows[i].size());
    num_choices[i] = k == 0 ? 1 : (1 << k) - 1;
  }
  std::vector<int> choice(n, 0);
  std::vector<std::pair<int, int>> arcs;
  while (true) {
    SparseMatrix P;
    P.n = n;
    P.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
      std::map<int, double> avg;
      if (!family.rows[i].empty()) {
        int mask = choice[i] + 1;
        int members = __builtin_popcount(mask);
        for (size_t k = 0; k < family.rows[i].size(); ++k)
          if (mask & (1 << k))
            for (const auto& e : family.rows[i][k])
              if (e.prob > 0.0) avg[e.target] += e.prob / members;
      }
      for (const auto& [j, p] : avg) {
        P.col.push_back(j);
        P.val.push_back(p);
      }
      P.row_ptr[i + 1] = static_cast<int64_t>(P.col.size());
    }
    ClassDecomposition decomp = decompose(P);
    for (const auto& cls : decomp.classes) {
      if (!cls.final) continue;
      for (int i : cls.states)
        for (int64_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
          if (P.val[k] > 0.0 &&
              decomp.class_of[P.col[k]] == decomp.class_of[i])
            arcs.emplace_back(i, P.col[k]);
    }

    int pos = n - 1;
    while (pos >= 0 && ++choice[pos] == num_choices[pos]) {
      choice[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return make_critical_result(std::move(arcs), n);
}

}  // namespace mpg
