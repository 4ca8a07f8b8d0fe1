#include "mpg/critical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpg/shapley.hpp"

namespace mpg {
namespace {

// Tarjan SCCs of a plain adjacency-list digraph (iterative).
std::vector<std::vector<int>> scc_partition(
    const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<std::vector<int>> sccs;
  struct Frame {
    int v;
    size_t edge;
  };
  std::vector<Frame> dfs;
  int next_index = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    dfs.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!dfs.empty()) {
      Frame& f = dfs.back();
      if (f.edge < adj[f.v].size()) {
        int w = adj[f.v][f.edge++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          dfs.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[f.v] = std::min(lowlink[f.v], index[w]);
        }
      } else {
        int v = f.v;
        dfs.pop_back();
        if (!dfs.empty())
          lowlink[dfs.back().v] = std::min(lowlink[dfs.back().v], lowlink[v]);
        if (lowlink[v] == index[v]) {
          std::vector<int> members;
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            members.push_back(w);
          } while (w != v);
          std::sort(members.begin(), members.end());
          sccs.push_back(std::move(members));
        }
      }
    }
  }
  return sccs;
}

}  // namespace

RowFamily tilde_family(const OnePlayerGame& g, std::span<const double> u,
                       double eps) {
  const int n = g.num_states();
  std::vector<double> gu = apply_g(g, u);
  for (int i = 0; i < n; ++i)
    if (std::fabs(gu[i] - u[i]) > eps)
      throw SolverError("tilde_family: vector is not harmonic at state " +
                        std::to_string(i));
  RowFamily fam;
  fam.n = n;
  fam.rows.resize(n);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < g.num_actions(i); ++b)
      if (std::fabs(apply_G(g, u, i, b) - u[i]) <= eps) {
        auto row = g.row(i, b);
        fam.rows[i].emplace_back(row.begin(), row.end());
      }
  return fam;
}

CriticalResult critical_graph(const RowFamily& family) {
  const int n = family.n;
  // Surviving rows per state, as support target lists (entries with zero
  // probability are ignored).
  std::vector<std::vector<std::vector<int>>> rows(n);
  for (int i = 0; i < n; ++i)
    for (const auto& row : family.rows[i]) {
      std::vector<int> support;
      for (const auto& e : row)
        if (e.prob > 0.0) support.push_back(e.target);
      rows[i].push_back(std::move(support));
    }

  std::vector<bool> in_I(n, true);
  std::vector<std::pair<int, int>> arcs;

  for (int round = 0; round <= n; ++round) {
    // Closure: a state with no surviving row cannot support any mass (its
    // value recedes to -infinity in the paper's extension); drop it from I
    // and kill every row leaking onto it.
    bool changed = true;
    while (changed) {
      changed = false;
      for (int i = 0; i < n; ++i) {
        if (!in_I[i]) continue;
        auto& ri = rows[i];
        ri.erase(std::remove_if(ri.begin(), ri.end(),
                                [&](const std::vector<int>& support) {
                                  for (int j : support)
                                    if (!in_I[j]) return true;
                                  return false;
                                }),
                 ri.end());
        if (ri.empty()) {
          in_I[i] = false;
          changed = true;
        }
      }
    }

    std::vector<int> nodes;
    for (int i = 0; i < n; ++i)
      if (in_I[i]) nodes.push_back(i);
    if (nodes.empty()) break;

    // Support graph on the remaining states (every node has out-degree >= 1,
    // so at least one sink SCC exists and carries an arc).
    std::vector<int> local(n, -1);
    for (size_t li = 0; li < nodes.size(); ++li) local[nodes[li]] = li;
    std::vector<std::vector<int>> adj(nodes.size());
    for (size_t li = 0; li < nodes.size(); ++li) {
      std::vector<int>& out = adj[li];
      for (const auto& support : rows[nodes[li]])
        for (int j : support) out.push_back(local[j]);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
    }

    std::vector<std::vector<int>> sccs = scc_partition(adj);
    std::vector<int> scc_of(nodes.size());
    for (size_t s = 0; s < sccs.size(); ++s)
      for (int v : sccs[s]) scc_of[v] = static_cast<int>(s);

    std::vector<bool> in_F(nodes.size(), false);
    bool found = false;
    for (const auto& scc : sccs) {
      bool sink = true;
      for (int v : scc)
        for (int w : adj[v])
          if (scc_of[w] != scc_of[v]) {
            sink = false;
            break;
          }
      if (!sink) continue;
      found = true;
      for (int v : scc) in_F[v] = true;
    }
    if (!found)
      throw SolverError("critical_graph: no final class in a nonempty round");

    for (size_t li = 0; li < nodes.size(); ++li) {
      if (!in_F[li]) continue;
      for (int lj : adj[li])
        if (in_F[lj]) arcs.emplace_back(nodes[li], nodes[lj]);
    }
    for (size_t li = 0; li < nodes.size(); ++li)
      if (in_F[li]) in_I[nodes[li]] = false;
  }

  return make_critical_result(std::move(arcs), n);
}

CriticalResult make_critical_result(std::vector<std::pair<int, int>> arcs,
                                    int n) {
  CriticalResult result;
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
  result.arcs = std::move(arcs);

  std::vector<int> crit;
  for (const auto& [a, b] : result.arcs) {
    crit.push_back(a);
    crit.push_back(b);
  }
  std::sort(crit.begin(), crit.end());
  crit.erase(std::unique(crit.begin(), crit.end()), crit.end());
  result.critical_nodes = crit;

  // SCC partition of the critical graph itself.
  std::vector<int> local(n, -1);
  for (size_t li = 0; li < crit.size(); ++li) local[crit[li]] = li;
  std::vector<std::vector<int>> adj(crit.size());
  for (const auto& [a, b] : result.arcs) adj[local[a]].push_back(local[b]);
  for (auto& scc : scc_partition(adj)) {
    for (int& v : scc) v = crit[v];
    result.sccs.push_back(std::move(scc));
  }
  std::sort(result.sccs.begin(), result.sccs.end());
  return result;
}

std::pair<StoppedProblem, std::vector<int>> build_stopped_problem(
    const OnePlayerGame& g, const std::vector<int>& C,
    std::span<const double> u) {
  const int n = g.num_states();
  std::vector<bool> in_C(n, false);
  for (int c : C) in_C[c] = true;
  std::vector<int> free_states;
  for (int i = 0; i < n; ++i)
    if (!in_C[i]) free_states.push_back(i);
  std::vector<int> local(n, -1);
  for (size_t li = 0; li < free_states.size(); ++li)
    local[free_states[li]] = li;

  OnePlayerGame::Builder builder(
      std::max<int>(1, static_cast<int>(free_states.size())));
  for (int i : free_states)
    for (int b = 0; b < g.num_actions(i); ++b) {
      double reward = g.reward(i, b);
      std::vector<TransitionEntry> row;
      for (const auto& e : g.row(i, b)) {
        if (in_C[e.target])
          reward += e.prob * u[e.target];
        else
          row.push_back({local[e.target], e.prob});
      }
      builder.add(local[i], reward, std::move(row));
    }
  if (free_states.empty()) {
    // Placeholder single state; callers never reach it when N is empty.
    builder.add(0, 0.0, {{0, 0.0}});
  }
  return {StoppedProblem{builder.build()}, std::move(free_states)};
}

std::vector<double> spectral_projection(const OnePlayerGame& g,
                                        const std::vector<int>& C,
                                        std::span<const double> u,
                                        const OnePlayerOptions& opts) {
  const int n = g.num_states();
  std::vector<double> gu = apply_g(g, u);
  for (int i = 0; i < n; ++i)
    if (gu[i] > u[i] + opts.tol.eps_v)
      throw SolverError("spectral_projection: vector not super-harmonic at "
                        "state " + std::to_string(i));

  std::vector<double> v(u.begin(), u.end());
  auto [stopped, free_states] = build_stopped_problem(g, C, u);
  if (free_states.empty()) return v;
  HowardResult inner = howard_stopped(
      stopped, lowest_index_strategy(stopped.game), opts);
  for (size_t li = 0; li < free_states.size(); ++li)
    v[free_states[li]] = inner.v[li];
  return v;
}

}  // namespace mpg
