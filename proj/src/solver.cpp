#include "mpg/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

#include "mpg/chains.hpp"

namespace mpg {
namespace {

uint64_t fnv1a_hash(const std::vector<int>& xs) {
  uint64_t h = 1469598103934665603ull;
  for (int x : xs) {
    for (int s = 0; s < 32; s += 8) {
      h ^= static_cast<uint64_t>((x >> s) & 0xff);
      h *= 1099511628211ull;
    }
  }
  return h;
}

OnePlayerOptions inner_options(const SolveOptions& opts) {
  OnePlayerOptions inner;
  inner.tol = opts.tol;
  inner.chain = opts.chain;
  inner.max_iterations = opts.max_inner;
  inner.check_properties = opts.check_properties;
  return inner;
}

/// The operator tangent to f^(sigma) in direction eta: per state, only the
/// slope-optimal rows survive and rewards are shifted by -eta_i, so the
/// result is reward-free at infinity (g_bar = tangent - eta).
OnePlayerGame tangent_game(const OnePlayerGame& g, std::span<const double> eta,
                           double eps_eta) {
  OnePlayerGame::Builder builder(g.num_states());
  for (int i = 0; i < g.num_states(); ++i)
    for (int b : max_action_set(g, eta, i, eps_eta)) {
      auto row = g.row(i, b);
      builder.add(i, g.reward(i, b) - eta[i],
                  std::vector<TransitionEntry>(row.begin(), row.end()));
    }
  return builder.build();
}

void validate_injected_bias(const OnePlayerGame& g,
                            std::span<const double> eta,
                            const std::vector<double>& bias, int iteration) {
  if (bias.size() != static_cast<size_t>(g.num_states()))
    throw SolverError("injected bias has wrong length at iteration " +
                      std::to_string(iteration));
  HalfLine hl{std::vector<double>(eta.begin(), eta.end()), bias};
  if (residual(g, hl) > 1e-9)
    throw SolverError("injected bias is not an invariant half-line bias at "
                      "iteration " + std::to_string(iteration));
}

}  // namespace

MinStrategy lowest_index_min_strategy(const Game& game) {
  return MinStrategy{std::vector<int>(game.num_states(), 0)};
}

MinStrategy random_min_strategy(const Game& game, uint64_t seed) {
  std::mt19937_64 rng(seed);
  MinStrategy s{std::vector<int>(game.num_states(), 0)};
  for (int i = 0; i < game.num_states(); ++i)
    s.sigma[i] = static_cast<int>(rng() % game.num_min_actions(i));
  return s;
}

bool check_invariant_halfline(const Game& game, const HalfLine& hl,
                              const Tolerances& tol) {
  return residual(game, hl) <= tol.eps_g;
}

SolveReport solve(const Game& game, const MinStrategy& sigma0,
                  const SolveOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  validate_min_strategy(game, sigma0);
  const int n = game.num_states();
  const Tolerances& tol = opts.tol;
  const bool warm = opts.warm_start && !opts.strict_trace;

  SolveReport rep;
  rep.sigma = sigma0;

  auto inject = [&](const OnePlayerGame& g, std::span<const double> eta,
                    std::vector<double>& v, int k) {
    auto it = opts.injected_bias.find(k);
    if (it == opts.injected_bias.end()) return;
    validate_injected_bias(g, eta, it->second, k);
    v = it->second;
  };

  OnePlayerGame g = restrict_min(game, rep.sigma);
  OnePlayerSolution inner =
      multichain_pi(g, lowest_index_strategy(g), inner_options(opts));
  rep.inner_iterations += inner.iterations;
  for (auto& s : inner.violations) rep.property_violations.push_back(s);
  std::vector<double> eta = std::move(inner.eta);
  std::vector<double> v = std::move(inner.v);
  rep.delta = std::move(inner.delta);
  inject(g, eta, v, 0);

  std::unordered_map<uint64_t, int> seen;
  seen.emplace(fnv1a_hash(rep.sigma.sigma), 0);

  // State carried between degenerate iterations for the C-monotonicity law.
  bool prev_degenerate = false;
  std::vector<int> prev_critical;

  for (int k = 0;; ++k) {
    rep.outer_iterations = k + 1;
    double res = residual(game, HalfLine{eta, v}, tol.eps_eta);

    // Conservative lexicographic improvement of the MIN strategy.
    MinStrategy next = rep.sigma;
    for (int i = 0; i < n; ++i) {
      std::vector<int> abar = min_action_set(game, eta, i, tol.eps_eta);
      double best = std::numeric_limits<double>::infinity();
      int arg = -1;
      double cur_val = std::numeric_limits<double>::infinity();
      bool cur_in_abar = false;
      for (int a : abar) {
        double val = -std::numeric_limits<double>::infinity();
        for (int b : max_action_set(game, eta, i, a, tol.eps_eta))
          val = std::max(val, apply_pair(game, v, i, a, b));
        if (val < best) {
          best = val;
          arg = a;
        }
        if (a == rep.sigma.sigma[i]) {
          cur_in_abar = true;
          cur_val = val;
        }
      }
      if (cur_in_abar && cur_val <= best + tol.eps_v) continue;
      next.sigma[i] = arg;
    }

    bool improved = next.sigma != rep.sigma.sigma;
    if (!improved || res <= tol.eps_g) {
      if (improved && res <= tol.eps_g)
        rep.warnings.push_back(
            "residual converged while an improvement remained at iteration " +
            std::to_string(k));
      if (!improved && res > tol.eps_g)
        rep.warnings.push_back(
            "no improvement found but residual " + std::to_string(res) +
            " exceeds eps_g at iteration " + std::to_string(k));
      rep.status = SolveStatus::kConverged;
      rep.residual = res;
      break;
    }
    if (k + 1 >= opts.max_outer) {
      rep.status = SolveStatus::kOuterCapExceeded;
      rep.residual = res;
      break;
    }

    OnePlayerGame g_next = restrict_min(game, next);
    MaxStrategy delta0 = lowest_index_strategy(g_next);
    if (warm) {
      for (int i = 0; i < n; ++i)
        if (next.sigma[i] == rep.sigma.sigma[i])
          delta0.delta[i] = rep.delta.delta[i];
    }
    OnePlayerSolution sol =
        multichain_pi(g_next, delta0, inner_options(opts));
    rep.inner_iterations += sol.iterations;
    for (auto& s : sol.violations) rep.property_violations.push_back(s);
    inject(g_next, sol.eta, sol.v, k + 1);

    double eta_change = sup_norm_diff(sol.eta, eta);
    bool degenerate = eta_change <= tol.eps_eta;
    if (!degenerate && eta_change <= 100 * tol.eps_eta)
      rep.warnings.push_back("near-degenerate slope change " +
                             std::to_string(eta_change) + " at iteration " +
                             std::to_string(k + 1));
    if (opts.check_properties) {
      for (int i = 0; i < n; ++i)
        if (sol.eta[i] > eta[i] + tol.eps_eta) {
          rep.property_violations.push_back(
              "outer slope increased at state " + std::to_string(i) +
              ", iteration " + std::to_string(k + 1));
          break;
        }
    }

    IterationTrace trace;
    trace.eta_change = eta_change;
    trace.degenerate = degenerate;

    std::vector<double> v_next;
    std::vector<int> critical_now;
    if (degenerate) {
      ++rep.degenerate_count;
      OnePlayerGame gbar = tangent_game(g_next, sol.eta, tol.eps_eta);
      std::vector<double> vbar = sol.v;  // harmonic for gbar
      RowFamily fam = tilde_family(gbar, vbar, tol.eps_v);
      CriticalResult crit = critical_graph(fam);
      trace.critical_scc_count = static_cast<int>(crit.sccs.size());
      trace.strongly_degenerate = crit.sccs.size() >= 2;
      if (trace.strongly_degenerate) ++rep.strongly_degenerate_count;
      critical_now = crit.critical_nodes;

      if (opts.naive) {
        v_next = sol.v;
      } else if (crit.sccs.size() <= 1 && !opts.strict_trace) {
        // Single-SCC shortcut: the projection would only shift the bias by a
        // constant on each chain, which later iterations tolerate.
        v_next = sol.v;
      } else {
        // Project the previous bias onto the harmonic vectors of gbar.
        // gbar's rewards are already shifted by -eta, so harmonic means
        // gbar(w) = w.
        std::vector<double> shifted_u = v;
        v_next = spectral_projection(gbar, crit.critical_nodes, shifted_u,
                                     inner_options(opts));
        if (opts.check_properties) {
          for (int c : crit.critical_nodes)
            if (std::fabs(v_next[c] - v[c]) > 1e-12) {
              rep.property_violations.push_back(
                  "projected bias moved on the critical set at state " +
                  std::to_string(c));
              break;
            }
          for (int i = 0; i < n; ++i)
            if (v_next[i] > v[i] + 1e-10) {
              rep.property_violations.push_back(
                  "bias increased at degenerate iteration, state " +
                  std::to_string(i));
              break;
            }
        }
      }
      if (opts.check_properties && prev_degenerate) {
        // Consecutive degenerate iterations under equal slopes only shrink
        // the critical set.
        std::vector<bool> prev_in(n, false);
        for (int c : prev_critical) prev_in[c] = true;
        for (int c : critical_now)
          if (!prev_in[c]) {
            rep.property_violations.push_back(
                "critical set grew across consecutive degenerate iterations");
            break;
          }
      }
    } else {
      v_next = sol.v;
    }

    prev_degenerate = degenerate;
    prev_critical = std::move(critical_now);

    rep.sigma = std::move(next);
    rep.delta = std::move(sol.delta);
    eta = std::move(sol.eta);
    v = std::move(v_next);
    rep.trace.push_back(trace);

    auto [it, fresh] = seen.emplace(fnv1a_hash(rep.sigma.sigma), k + 1);
    if (!fresh) {
      if (opts.naive) {
        rep.status = SolveStatus::kCycleDetected;
        rep.cycle_iteration = k + 1;
        rep.residual = residual(game, HalfLine{eta, v}, tol.eps_eta);
        rep.warnings.push_back("MIN strategy of iteration " +
                               std::to_string(it->second) +
                               " revisited at iteration " +
                               std::to_string(k + 1));
        break;
      }
      rep.property_violations.push_back("MIN strategy revisited at iteration " +
                                        std::to_string(k + 1));
    }
  }

  rep.halfline = HalfLine{std::move(eta), std::move(v)};
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

}  // namespace mpg
