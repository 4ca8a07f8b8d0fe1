#include "mpg/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace mpg {
namespace {

std::vector<TransitionEntry> half_half(int ja, int jb) {
  if (ja == jb) return {{ja, 1.0}};
  return {{ja, 0.5}, {jb, 0.5}};
}

}  // namespace

Game richman_from_graph(const std::vector<std::vector<int>>& arcs,
                        const std::vector<std::vector<double>>& rewards) {
  const int n = static_cast<int>(arcs.size());
  Game::Builder builder(n);
  for (int i = 0; i < n; ++i) {
    const auto& out = arcs[i];
    const auto& rw = rewards[i];
    for (size_t a = 0; a < out.size(); ++a)
      for (size_t b = 0; b < out.size(); ++b)
        builder.add(i, static_cast<int>(a), static_cast<int>(b),
                    0.5 * (rw[a] + rw[b]), half_half(out[a], out[b]));
  }
  return builder.build();
}

Game gen_richman(const RichmanConfig& cfg) {
  if (cfg.n <= 0 || cfg.out_degree < 1)
    throw GameError("invalid Richman configuration");
  const int degree = std::min(cfg.out_degree, cfg.n);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<int>> arcs(cfg.n);
  std::vector<std::vector<double>> rewards(cfg.n);
  std::unordered_set<int> chosen;
  for (int i = 0; i < cfg.n; ++i) {
    chosen.clear();
    while (static_cast<int>(chosen.size()) < degree)
      chosen.insert(static_cast<int>(rng() % cfg.n));
    arcs[i].assign(chosen.begin(), chosen.end());
    std::sort(arcs[i].begin(), arcs[i].end());
    rewards[i].resize(degree);
    for (int k = 0; k < degree; ++k)
      rewards[i][k] = static_cast<double>(rng() % 2);
  }
  return richman_from_graph(arcs, rewards);
}

Game example_5node() {
  // Arc weights of the complete graph on five nodes; row i gives the weight
  // of the arc i -> j.
  const std::vector<std::vector<double>> r = {
      {1, -1, 0, 0, 0},
      {1, -1, 0, 0, 0},
      {0, 0, 1, -1, 0},
      {0, 0, 1, -1, 0},
      {0, -1, 0, -1, 1},
  };
  std::vector<std::vector<int>> arcs(5, {0, 1, 2, 3, 4});
  return richman_from_graph(arcs, r);
}

namespace {

// Sparse stochastic row: k distinct targets among n states, probabilities
// c/64 with integer c summing to 64, so the double row sum is exactly 1.
std::vector<TransitionEntry> random_dyadic_row(std::mt19937_64& rng, int n,
                                               int max_arcs) {
  int k = 1 + static_cast<int>(rng() % std::min(n, max_arcs));
  std::unordered_set<int> targets;
  while (static_cast<int>(targets.size()) < k)
    targets.insert(static_cast<int>(rng() % n));
  std::vector<int> cuts{0, 64};
  for (int c = 1; c < k; ++c) cuts.push_back(1 + static_cast<int>(rng() % 63));
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> sorted_targets(targets.begin(), targets.end());
  std::sort(sorted_targets.begin(), sorted_targets.end());
  std::vector<TransitionEntry> row;
  for (int t = 0; t < k; ++t) {
    int weight = cuts[t + 1] - cuts[t];
    if (weight > 0) row.push_back({sorted_targets[t], weight / 64.0});
  }
  return row;
}

// Row with half its mass anchored on state 0 and the rest dyadic over at
// most two random targets. The anchor gives every one-step kernel a Doeblin
// coefficient of 1/2, so biases of these games have span at most twice the
// reward span; with rewards in [0, 1] this keeps ||v||_inf <= 2, the premise
// of the 5/T error bound used when cross-checking against
// value_iteration_slope.
std::vector<TransitionEntry> anchored_dyadic_row(std::mt19937_64& rng, int n) {
  std::vector<int> weight(n, 0);
  weight[0] = 64;
  int k = 1 + static_cast<int>(rng() % std::min(n, 2));
  std::vector<int> cuts{0, 64};
  for (int c = 1; c < k; ++c) cuts.push_back(1 + static_cast<int>(rng() % 63));
  std::sort(cuts.begin(), cuts.end());
  for (int t = 0; t < k; ++t)
    weight[static_cast<int>(rng() % n)] += cuts[t + 1] - cuts[t];
  std::vector<TransitionEntry> row;
  for (int j = 0; j < n; ++j)
    if (weight[j] > 0) row.push_back({j, weight[j] / 128.0});
  return row;
}

// Dyadic reward in [0, 1].
double random_reward01(std::mt19937_64& rng) {
  return static_cast<double>(rng() % 1025) / 1024.0;
}

}  // namespace

Game gen_random_small(uint64_t seed) {
  std::mt19937_64 rng(seed);
  int n = 1 + static_cast<int>(rng() % 5);
  Game::Builder builder(n);
  for (int i = 0; i < n; ++i) {
    int na = 1 + static_cast<int>(rng() % 2);
    for (int a = 0; a < na; ++a) {
      int nb = 1 + static_cast<int>(rng() % 2);
      for (int b = 0; b < nb; ++b)
        builder.add(i, a, b, random_reward01(rng), anchored_dyadic_row(rng, n));
    }
  }
  return builder.build();
}

RowFamily gen_random_family(uint64_t seed) {
  std::mt19937_64 rng(seed);
  RowFamily fam;
  fam.n = 1 + static_cast<int>(rng() % 6);
  fam.rows.resize(fam.n);
  for (int i = 0; i < fam.n; ++i) {
    int k = rng() % 10 == 0 ? 0 : 1 + static_cast<int>(rng() % 3);
    for (int j = 0; j < k; ++j)
      fam.rows[i].push_back(random_dyadic_row(rng, fam.n, 3));
  }
  return fam;
}

CatMouseInstance gen_catmouse(const CatMouseConfig& cfg) {
  const int m = cfg.grid;
  if (m < 3 || m % 2 == 0) throw GameError("grid size must be odd and >= 3");
  if (!(cfg.speed > 0)) throw GameError("speed must be positive");
  const double h = 1.0 / (m - 1);
  const double q_max = 2.0 * (1.0 + cfg.speed);
  const double dt = h / q_max;

  CatMouseInstance inst;
  inst.dt = dt;
  inst.coords.resize(static_cast<size_t>(m) * m);

  Game::Builder builder(m * m);
  // Per-axis move components, low to high so action order is deterministic.
  const double cat_steps[3] = {-cfg.speed, 0.0, cfg.speed};
  const double mouse_steps[3] = {-1.0, 0.0, 1.0};

  for (int iy = 0; iy < m; ++iy)
    for (int ix = 0; ix < m; ++ix) {
      const int state = iy * m + ix;
      const double x1 = ix * h - 0.5;
      const double x2 = iy * h - 0.5;
      inst.coords[state] = {x1, x2};
      const double payoff = (x1 * x1 + x2 * x2) * dt;
      const bool frozen =
          x1 * x1 + x2 * x2 < cfg.freeze_radius * cfg.freeze_radius;

      // A component is allowed when the induced grid move stays inside.
      auto axis_ok = [m](int idx, double component) {
        if (component > 0) return idx < m - 1;
        if (component < 0) return idx > 0;
        return true;
      };

      int a = 0;
      for (double c1 : cat_steps) {
        if (!axis_ok(ix, c1)) continue;
        for (double c2 : cat_steps) {
          if (!axis_ok(iy, c2)) continue;
          int b = 0;
          for (double e1 : mouse_steps) {
            if (frozen && e1 != 0.0) continue;
            if (!axis_ok(ix, e1)) continue;
            for (double e2 : mouse_steps) {
              if (frozen && e2 != 0.0) continue;
              if (!axis_ok(iy, e2)) continue;
              const double g1 = c1 + e1;
              const double g2 = c2 + e2;
              std::vector<TransitionEntry> row;
              double mass = 0.0;
              auto push = [&](int target, double num) {
                double p = num / q_max;
                if (p > 0.0) {
                  row.push_back({target, p});
                  mass += p;
                }
              };
              push(state + 1, std::max(g1, 0.0));
              push(state - 1, std::max(-g1, 0.0));
              push(state + m, std::max(g2, 0.0));
              push(state - m, std::max(-g2, 0.0));
              double stay = 1.0 - mass;
              if (stay > 0.0) row.push_back({state, stay});
              builder.add(state, a, b, payoff, std::move(row));
              ++b;
            }
          }
          ++a;
        }
      }
    }
  inst.game = builder.build();
  return inst;
}

}  // namespace mpg
