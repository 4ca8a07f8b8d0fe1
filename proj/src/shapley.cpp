#include "mpg/shapley.hpp"

#include <cmath>
#include <limits>

namespace mpg {
namespace {

inline double dot_row(std::span<const TransitionEntry> row,
                      std::span<const double> v) {
  double acc = 0.0;
  for (const auto& e : row) acc += e.prob * v[e.target];
  return acc;
}

}  // namespace

double sup_norm_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double apply_pair(const Game& game, std::span<const double> v, int i, int a,
                  int b) {
  return dot_row(game.row(i, a, b), v) + game.reward(i, a, b);
}

double apply_F(const Game& game, std::span<const double> v, int i, int a) {
  double best = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < game.num_max_actions(i, a); ++b) {
    double val = dot_row(game.row(i, a, b), v) + game.reward(i, a, b);
    if (val > best) best = val;
  }
  return best;
}

std::vector<double> apply_f(const Game& game, std::span<const double> v) {
  std::vector<double> out(game.num_states());
  for (int i = 0; i < game.num_states(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < game.num_min_actions(i); ++a)
      best = std::min(best, apply_F(game, v, i, a));
    out[i] = best;
  }
  return out;
}

double recession_F(const Game& game, std::span<const double> eta, int i,
                   int a) {
  double best = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < game.num_max_actions(i, a); ++b)
    best = std::max(best, dot_row(game.row(i, a, b), eta));
  return best;
}

std::vector<double> recession(const Game& game, std::span<const double> eta) {
  std::vector<double> out(game.num_states());
  for (int i = 0; i < game.num_states(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < game.num_min_actions(i); ++a)
      best = std::min(best, recession_F(game, eta, i, a));
    out[i] = best;
  }
  return out;
}

std::vector<int> min_action_set(const Game& game, std::span<const double> eta,
                                int i, double eps_eta) {
  int na = game.num_min_actions(i);
  std::vector<double> vals(na);
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < na; ++a) {
    vals[a] = recession_F(game, eta, i, a);
    best = std::min(best, vals[a]);
  }
  std::vector<int> set;
  for (int a = 0; a < na; ++a)
    if (vals[a] <= best + eps_eta) set.push_back(a);
  return set;
}

std::vector<int> max_action_set(const Game& game, std::span<const double> eta,
                                int i, int a, double eps_eta) {
  int nb = game.num_max_actions(i, a);
  std::vector<double> vals(nb);
  double best = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < nb; ++b) {
    vals[b] = dot_row(game.row(i, a, b), eta);
    best = std::max(best, vals[b]);
  }
  std::vector<int> set;
  for (int b = 0; b < nb; ++b)
    if (vals[b] >= best - eps_eta) set.push_back(b);
  return set;
}

std::vector<double> tangent(const Game& game, std::span<const double> eta,
                            std::span<const double> v, double eps_eta) {
  std::vector<double> out(game.num_states());
  for (int i = 0; i < game.num_states(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int a : min_action_set(game, eta, i, eps_eta)) {
      double inner = -std::numeric_limits<double>::infinity();
      for (int b : max_action_set(game, eta, i, a, eps_eta)) {
        double val = dot_row(game.row(i, a, b), v) + game.reward(i, a, b);
        if (val > inner) inner = val;
      }
      best = std::min(best, inner);
    }
    out[i] = best;
  }
  return out;
}

double residual(const Game& game, const HalfLine& hl, double eps_eta) {
  std::vector<double> fe = recession(game, hl.eta);
  std::vector<double> ft = tangent(game, hl.eta, hl.v, eps_eta);
  double slope = 0.0, bias = 0.0;
  for (int i = 0; i < game.num_states(); ++i) {
    slope = std::max(slope, std::fabs(fe[i] - hl.eta[i]));
    bias = std::max(bias, std::fabs(ft[i] - hl.eta[i] - hl.v[i]));
  }
  return 0.5 * (slope + bias);
}

double apply_G(const OnePlayerGame& g, std::span<const double> v, int i,
               int b) {
  return dot_row(g.row(i, b), v) + g.reward(i, b);
}

std::vector<double> apply_g(const OnePlayerGame& g, std::span<const double> v) {
  std::vector<double> out(g.num_states());
  for (int i = 0; i < g.num_states(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < g.num_actions(i); ++b)
      best = std::max(best, apply_G(g, v, i, b));
    out[i] = best;
  }
  return out;
}

double recession_G(const OnePlayerGame& g, std::span<const double> eta, int i,
                   int b) {
  return dot_row(g.row(i, b), eta);
}

std::vector<double> recession_g(const OnePlayerGame& g,
                                std::span<const double> eta) {
  std::vector<double> out(g.num_states());
  for (int i = 0; i < g.num_states(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < g.num_actions(i); ++b)
      best = std::max(best, recession_G(g, eta, i, b));
    out[i] = best;
  }
  return out;
}

std::vector<int> max_action_set(const OnePlayerGame& g,
                                std::span<const double> eta, int i,
                                double eps_eta) {
  int nb = g.num_actions(i);
  std::vector<double> vals(nb);
  double best = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < nb; ++b) {
    vals[b] = recession_G(g, eta, i, b);
    best = std::max(best, vals[b]);
  }
  std::vector<int> set;
  for (int b = 0; b < nb; ++b)
    if (vals[b] >= best - eps_eta) set.push_back(b);
  return set;
}

std::vector<double> tangent(const OnePlayerGame& g, std::span<const double> eta,
                            std::span<const double> v, double eps_eta) {
  std::vector<double> out(g.num_states());
  for (int i = 0; i < g.num_states(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int b : max_action_set(g, eta, i, eps_eta))
      best = std::max(best, apply_G(g, v, i, b));
    out[i] = best;
  }
  return out;
}

double residual(const OnePlayerGame& g, const HalfLine& hl, double eps_eta) {
  std::vector<double> ge = recession_g(g, hl.eta);
  std::vector<double> gt = tangent(g, hl.eta, hl.v, eps_eta);
  double slope = 0.0, bias = 0.0;
  for (int i = 0; i < g.num_states(); ++i) {
    slope = std::max(slope, std::fabs(ge[i] - hl.eta[i]));
    bias = std::max(bias, std::fabs(gt[i] - hl.eta[i] - hl.v[i]));
  }
  return 0.5 * (slope + bias);
}

}  // namespace mpg
