#pragma once

#include <span>
#include <vector>

#include "mpg/game.hpp"

namespace mpg {

struct Tolerances {
  double eps_g = 1e-12;    // global residual
  double eps_eta = 1e-10;  // slope comparisons
  double eps_v = 1e-10;    // bias comparisons
};

/// Single action pair: sum_j P^{iab}_j v_j + r^{iab}.
double apply_pair(const Game& game, std::span<const double> v, int i, int a,
                  int b);

/// F(v; i, a) = max over b in B_{i,a} of (sum_j P^{iab}_j v_j + r^{iab}).
double apply_F(const Game& game, std::span<const double> v, int i, int a);

/// Shapley operator: [f(v)]_i = min_a F(v; i, a).
std::vector<double> apply_f(const Game& game, std::span<const double> v);

/// Recession function: f_hat(eta)_i = min_a max_b sum_j P eta (no rewards).
std::vector<double> recession(const Game& game, std::span<const double> eta);

/// Per-action recession value F_hat(eta; i, a) = max_b sum_j P eta.
double recession_F(const Game& game, std::span<const double> eta, int i, int a);

/// {a : F_hat(eta;i,a) <= min_a' F_hat + eps_eta}; never empty.
std::vector<int> min_action_set(const Game& game, std::span<const double> eta,
                                int i, double eps_eta);

/// {b : sum_j P^{iab} eta >= max_b' - eps_eta}; never empty.
std::vector<int> max_action_set(const Game& game, std::span<const double> eta,
                                int i, int a, double eps_eta);

/// Tangent of f at infinity in direction eta: min over the argmin set
/// A_bar(eta), max over B_bar(a, eta), of (sum P v + r). eps_eta relaxes the
/// action sets (0 = exact argmin/argmax, the default inside solvers).
std::vector<double> tangent(const Game& game, std::span<const double> eta,
                            std::span<const double> v, double eps_eta = 0.0);

/// 0.5 * (||f_hat(eta) - eta||_inf + ||f_eta(v) - eta - v||_inf).
/// The tangent action sets are formed with the slope tolerance `eps_eta` so
/// that ties in `sum_j P_j eta_j` survive floating-point rounding.
double residual(const Game& game, const HalfLine& hl, double eps_eta = 1e-10);

// One-player analogues (min player removed). Rows may be substochastic.

/// G(v; i, b) = sum_j P^{ib}_j v_j + r^{ib}.
double apply_G(const OnePlayerGame& g, std::span<const double> v, int i, int b);

/// [g(v)]_i = max_b G(v; i, b).
std::vector<double> apply_g(const OnePlayerGame& g, std::span<const double> v);

/// G_hat(eta; i, b) = sum_j P^{ib}_j eta_j.
double recession_G(const OnePlayerGame& g, std::span<const double> eta, int i,
                   int b);

/// g_hat(eta)_i = max_b G_hat(eta; i, b).
std::vector<double> recession_g(const OnePlayerGame& g,
                                std::span<const double> eta);

/// {b : G_hat(eta;i,b) >= max_b' - eps_eta}.
std::vector<int> max_action_set(const OnePlayerGame& g,
                                std::span<const double> eta, int i,
                                double eps_eta);

/// Tangent at infinity of the one-player operator.
std::vector<double> tangent(const OnePlayerGame& g, std::span<const double> eta,
                            std::span<const double> v, double eps_eta = 0.0);

double residual(const OnePlayerGame& g, const HalfLine& hl,
                double eps_eta = 1e-10);

double sup_norm_diff(std::span<const double> a, std::span<const double> b);

}  // namespace mpg
