#include "mpg/chains.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

namespace mpg {
namespace {

using Triplet = Eigen::Triplet<double>;
using EigenSparse = Eigen::SparseMatrix<double>;

Eigen::VectorXd sparse_lu_solve(const EigenSparse& A, const Eigen::VectorXd& b,
                                const char* what) {
  Eigen::SparseLU<EigenSparse> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw ChainError(std::string("singular linear system in ") + what);
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success)
    throw ChainError(std::string("linear solve failed in ") + what);
  return x;
}

// Systems at most this large skip sparse LU; the setup overhead dominates on
// the tiny blocks that brute-force oracles solve by the million.
constexpr int kDenseCutoff = 32;

// Gaussian elimination with partial pivoting on a row-major dense matrix;
// A and b are consumed.
std::vector<double> dense_solve(std::vector<double> A, std::vector<double> b,
                                int m, const char* what) {
  for (int k = 0; k < m; ++k) {
    int piv = k;
    for (int i = k + 1; i < m; ++i)
      if (std::fabs(A[i * m + k]) > std::fabs(A[piv * m + k])) piv = i;
    if (std::fabs(A[piv * m + k]) < 1e-300)
      throw ChainError(std::string("singular linear system in ") + what);
    if (piv != k) {
      for (int j = k; j < m; ++j) std::swap(A[piv * m + j], A[k * m + j]);
      std::swap(b[piv], b[k]);
    }
    double inv = 1.0 / A[k * m + k];
    for (int i = k + 1; i < m; ++i) {
      double factor = A[i * m + k] * inv;
      if (factor == 0.0) continue;
      for (int j = k + 1; j < m; ++j) A[i * m + j] -= factor * A[k * m + j];
      b[i] -= factor * b[k];
    }
  }
  std::vector<double> x(m);
  for (int i = m - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < m; ++j) acc -= A[i * m + j] * x[j];
    x[i] = acc / A[i * m + i];
  }
  return x;
}

// Local (class-restricted) copy of rows of P, with a diagonal array for the
// SOR sweeps. Indices are positions within `states`.
struct LocalBlock {
  int m = 0;
  std::vector<int64_t> row_ptr;  // m+1, off-diagonal entries only
  std::vector<int32_t> col;
  std::vector<double> val;
  std::vector<double> diag;  // P_ii
};

LocalBlock local_block(const SparseMatrix& P, const std::vector<int>& states,
                       std::vector<int32_t>& scratch_local) {
  LocalBlock blk;
  blk.m = static_cast<int>(states.size());
  for (int li = 0; li < blk.m; ++li) scratch_local[states[li]] = li;
  blk.row_ptr.assign(blk.m + 1, 0);
  blk.diag.assign(blk.m, 0.0);
  for (int li = 0; li < blk.m; ++li) {
    int i = states[li];
    for (int64_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) {
      int32_t lj = scratch_local[P.col[k]];
      if (lj < 0) continue;
      if (lj == li)
        blk.diag[li] += P.val[k];
      else {
        blk.col.push_back(lj);
        blk.val.push_back(P.val[k]);
        blk.row_ptr[li + 1]++;
      }
    }
  }
  for (int li = 0; li < blk.m; ++li) blk.row_ptr[li + 1] += blk.row_ptr[li];
  for (int li = 0; li < blk.m; ++li) scratch_local[states[li]] = -1;
  return blk;
}

LocalBlock transpose_block(const LocalBlock& blk) {
  LocalBlock t;
  t.m = blk.m;
  t.diag = blk.diag;
  t.row_ptr.assign(blk.m + 1, 0);
  for (size_t k = 0; k < blk.col.size(); ++k) t.row_ptr[blk.col[k] + 1]++;
  for (int i = 0; i < blk.m; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col.resize(blk.col.size());
  t.val.resize(blk.val.size());
  std::vector<int64_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int i = 0; i < blk.m; ++i)
    for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k) {
      int64_t pos = next[blk.col[k]]++;
      t.col[pos] = i;
      t.val[pos] = blk.val[k];
    }
  return t;
}

// Dense row-major copy of I - P restricted to the block.
std::vector<double> dense_identity_minus(const LocalBlock& blk) {
  int m = blk.m;
  std::vector<double> A(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    A[static_cast<size_t>(i) * m + i] = 1.0 - blk.diag[i];
    for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k)
      A[static_cast<size_t>(i) * m + blk.col[k]] -= blk.val[k];
  }
  return A;
}

EigenSparse identity_minus(const LocalBlock& blk) {
  std::vector<Triplet> trips;
  trips.reserve(blk.col.size() + blk.m);
  for (int i = 0; i < blk.m; ++i) {
    trips.emplace_back(i, i, 1.0 - blk.diag[i]);
    for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k)
      trips.emplace_back(i, blk.col[k], -blk.val[k]);
  }
  EigenSparse A(blk.m, blk.m);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

int max_sweeps(const ChainSolveOptions& opts, int m) {
  return std::max(opts.sor_max_sweep_factor * m, 100);
}

void check_sor_diag(const LocalBlock& blk) {
  for (int i = 0; i < blk.m; ++i)
    if (1.0 - blk.diag[i] <= kFinalClassTol)
      throw ChainError("SOR sweep hit an absorbing diagonal entry");
}

// Half-damped copy Q = (P + I) / 2 of a block. Q has the same stationary
// vectors as P, and (I - P) v = c is equivalent to (I - Q) v = c / 2, while
// Q is aperiodic and weakly diagonally dominant, so the SOR sweeps converge
// on periodic chains where sweeps on P itself oscillate.
LocalBlock damp_half(const LocalBlock& blk) {
  LocalBlock q = blk;
  for (double& d : q.diag) d = 0.5 * (d + 1.0);
  for (double& x : q.val) x *= 0.5;
  return q;
}

// One SOR sweep in place for x = P x + c (Gauss-Seidel order 0..m-1).
void sor_sweep(const LocalBlock& blk, std::span<const double> c, double omega,
               std::vector<double>& x) {
  for (int i = 0; i < blk.m; ++i) {
    double acc = c[i];
    for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k)
      acc += blk.val[k] * x[blk.col[k]];
    x[i] = (1.0 - omega) * x[i] + omega * acc / (1.0 - blk.diag[i]);
  }
}

std::vector<double> solve_transient_block(const LocalBlock& blk,
                                          std::span<const double> c,
                                          LinearMethod method,
                                          const ChainSolveOptions& opts) {
  if (method == LinearMethod::kDirect) {
    if (blk.m <= kDenseCutoff)
      return dense_solve(dense_identity_minus(blk),
                         std::vector<double>(c.begin(), c.end()), blk.m,
                         "solve_transient");
    Eigen::VectorXd b(blk.m);
    for (int i = 0; i < blk.m; ++i) b[i] = c[i];
    Eigen::VectorXd x = sparse_lu_solve(identity_minus(blk), b, "solve_transient");
    return {x.data(), x.data() + blk.m};
  }
  check_sor_diag(blk);
  const int limit = std::max(max_sweeps(opts, blk.m), 20000);
  // x = P x + c is an M-matrix system, so Gauss-Seidel (omega <= 1) on the
  // half-damped block always converges; the caller's omega is tried first
  // because overrelaxation is faster when the block leaks quickly, but it can
  // diverge on barely substochastic blocks.
  auto run = [&](const LocalBlock& b, std::span<const double> rhs,
                 double omega) -> std::optional<std::vector<double>> {
    std::vector<double> x(b.m, 0.0), prev(b.m);
    for (int sweep = 0; sweep < limit; ++sweep) {
      prev = x;
      sor_sweep(b, rhs, omega, x);
      double change = 0.0;
      bool finite = true;
      for (int i = 0; i < b.m; ++i) {
        if (!std::isfinite(x[i])) {
          finite = false;
          break;
        }
        change = std::max(change, std::fabs(x[i] - prev[i]));
      }
      if (!finite) return std::nullopt;
      if (change <= opts.sor_tol) return x;
    }
    return std::nullopt;
  };
  if (auto x = run(blk, c, opts.sor_omega)) return *x;
  std::vector<double> c_half(c.begin(), c.end());
  for (double& v : c_half) v *= 0.5;
  if (auto x = run(damp_half(blk), c_half, std::min(opts.sor_omega, 1.0)))
    return *x;
  throw ChainError("SOR did not converge in solve_transient");
}

StationaryDistribution stationary_block(const LocalBlock& blk,
                                        LinearMethod method,
                                        const ChainSolveOptions& opts) {
  int m = blk.m;
  if (m == 1) return {1.0};
  if (method == LinearMethod::kDirect) {
    // (I - P^T) pi = 0 with the first equation replaced by sum(pi) = 1.
    if (m <= kDenseCutoff) {
      std::vector<double> A(static_cast<size_t>(m) * m, 0.0);
      for (int j = 0; j < m; ++j) A[j] = 1.0;
      for (int i = 1; i < m; ++i)
        A[static_cast<size_t>(i) * m + i] = 1.0 - blk.diag[i];
      for (int i = 0; i < m; ++i)
        for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k)
          if (blk.col[k] != 0)
            A[static_cast<size_t>(blk.col[k]) * m + i] -= blk.val[k];
      std::vector<double> b(m, 0.0);
      b[0] = 1.0;
      StationaryDistribution out = dense_solve(std::move(A), std::move(b), m,
                                               "stationary");
      double sum = std::accumulate(out.begin(), out.end(), 0.0);
      for (double& p : out) p /= sum;
      return out;
    }
    std::vector<Triplet> trips;
    for (int j = 0; j < m; ++j) trips.emplace_back(0, j, 1.0);
    for (int i = 1; i < m; ++i) trips.emplace_back(i, i, 1.0 - blk.diag[i]);
    for (int i = 0; i < m; ++i)
      for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k)
        if (blk.col[k] != 0) trips.emplace_back(blk.col[k], i, -blk.val[k]);
    EigenSparse A(m, m);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b[0] = 1.0;
    Eigen::VectorXd pi = sparse_lu_solve(A, b, "stationary");
    StationaryDistribution out(pi.data(), pi.data() + m);
    double sum = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& p : out) p /= sum;
    return out;
  }
  // Damped power iteration pi <- pi (P + I) / 2. Relaxed sweeps are not
  // semiconvergent on this singular system (the iterate leaves the positive
  // cone on periodic chains), while the damped power step preserves
  // positivity and contracts every non-stationary mode.
  LocalBlock pt = damp_half(transpose_block(blk));
  std::vector<double> pi(m, 1.0 / m), next(m);
  // The power step contracts at the mixing rate, which is independent of the
  // class size, so small slowly-mixing classes need more than 100 m sweeps.
  int limit = std::max(max_sweeps(opts, m), 20000);
  for (int sweep = 0; sweep < limit; ++sweep) {
    for (int i = 0; i < m; ++i) {
      double acc = pt.diag[i] * pi[i];
      for (int64_t k = pt.row_ptr[i]; k < pt.row_ptr[i + 1]; ++k)
        acc += pt.val[k] * pi[pt.col[k]];
      next[i] = acc;
    }
    double sum = std::accumulate(next.begin(), next.end(), 0.0);
    for (double& p : next) p /= sum;
    double change = 0.0;
    for (int i = 0; i < m; ++i)
      change = std::max(change, std::fabs(next[i] - pi[i]));
    pi.swap(next);
    if (change <= opts.sor_tol) return pi;
  }
  throw ChainError("SOR did not converge in stationary");
}

// In-class bias solve of a final class: (I - P_FF) v = r - eta_bar with
// v[pinned] = 0 (the redundant equation at `pinned` is dropped).
std::vector<double> final_bias_block(const LocalBlock& blk,
                                     std::span<const double> r, double eta_bar,
                                     int pinned, LinearMethod method,
                                     const ChainSolveOptions& opts) {
  int m = blk.m;
  if (method == LinearMethod::kDirect) {
    if (m <= kDenseCutoff) {
      std::vector<double> A(static_cast<size_t>(m) * m, 0.0);
      std::vector<double> b(m, 0.0);
      for (int i = 0; i < m; ++i) {
        if (i == pinned) {
          A[static_cast<size_t>(i) * m + i] = 1.0;
          continue;
        }
        A[static_cast<size_t>(i) * m + i] = 1.0 - blk.diag[i];
        for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k)
          A[static_cast<size_t>(i) * m + blk.col[k]] -= blk.val[k];
        b[i] = r[i] - eta_bar;
      }
      return dense_solve(std::move(A), std::move(b), m, "final-class bias");
    }
    std::vector<Triplet> trips;
    for (int i = 0; i < m; ++i) {
      if (i == pinned) {
        trips.emplace_back(i, i, 1.0);
        continue;
      }
      trips.emplace_back(i, i, 1.0 - blk.diag[i]);
      for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k)
        trips.emplace_back(i, blk.col[k], -blk.val[k]);
    }
    EigenSparse A(m, m);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) b[i] = i == pinned ? 0.0 : r[i] - eta_bar;
    Eigen::VectorXd v = sparse_lu_solve(A, b, "final-class bias");
    return {v.data(), v.data() + m};
  }
  LocalBlock q = damp_half(blk);
  check_sor_diag(q);
  std::vector<double> c(m);
  for (int i = 0; i < m; ++i) c[i] = 0.5 * (r[i] - eta_bar);
  std::vector<double> v(m, 0.0), prev(m);
  int limit = std::max(max_sweeps(opts, m), 20000);
  // This system is singular (constants are in the kernel); over-relaxation
  // loses semiconvergence here, so the sweeps are capped at plain
  // Gauss-Seidel.
  double omega = std::min(opts.sor_omega, 1.0);
  for (int sweep = 0; sweep < limit; ++sweep) {
    prev = v;
    sor_sweep(q, c, omega, v);
    // Projector (I - 1 mu): re-anchor the pinned coordinate at zero.
    double shift = v[pinned];
    for (double& x : v) x -= shift;
    double change = 0.0;
    for (int i = 0; i < m; ++i)
      change = std::max(change, std::fabs(v[i] - prev[i]));
    if (change <= opts.sor_tol) return v;
  }
  throw ChainError("SOR did not converge in final-class bias solve");
}

// Method B: solve the bordered system eta_bar + v_x - (P v)_x = r_x on the
// class together with v[pinned] = 0; unknowns (v_0..v_{m-1}, eta_bar).
std::pair<double, std::vector<double>> final_bordered_block(
    const LocalBlock& blk, std::span<const double> r, int pinned) {
  int m = blk.m;
  if (m + 1 <= kDenseCutoff) {
    int d = m + 1;
    std::vector<double> A(static_cast<size_t>(d) * d, 0.0);
    for (int i = 0; i < m; ++i) {
      A[static_cast<size_t>(i) * d + i] = 1.0 - blk.diag[i];
      for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k)
        A[static_cast<size_t>(i) * d + blk.col[k]] -= blk.val[k];
      A[static_cast<size_t>(i) * d + m] = 1.0;
    }
    A[static_cast<size_t>(m) * d + pinned] = 1.0;
    std::vector<double> b(d, 0.0);
    for (int i = 0; i < m; ++i) b[i] = r[i];
    std::vector<double> x = dense_solve(std::move(A), std::move(b), d,
                                        "final-class bordered system");
    double eta_bar = x[m];
    x.resize(m);
    return {eta_bar, std::move(x)};
  }
  std::vector<Triplet> trips;
  for (int i = 0; i < m; ++i) {
    trips.emplace_back(i, i, 1.0 - blk.diag[i]);
    for (int64_t k = blk.row_ptr[i]; k < blk.row_ptr[i + 1]; ++k)
      trips.emplace_back(i, blk.col[k], -blk.val[k]);
    trips.emplace_back(i, m, 1.0);
  }
  trips.emplace_back(m, pinned, 1.0);
  EigenSparse A(m + 1, m + 1);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd b(m + 1);
  for (int i = 0; i < m; ++i) b[i] = r[i];
  b[m] = 0.0;
  Eigen::VectorXd x = sparse_lu_solve(A, b, "final-class bordered system");
  return {x[m], std::vector<double>(x.data(), x.data() + m)};
}

}  // namespace

bool SparseMatrix::stochastic(double tol) const {
  for (int i = 0; i < n; ++i)
    if (std::fabs(row_sum(i) - 1.0) > tol) return false;
  return true;
}

ClassDecomposition decompose(const SparseMatrix& P) {
  const int n = P.n;
  // Iterative Tarjan; SCCs are emitted sinks-first, so reversing the emission
  // order yields the block-upper-triangular (sources-first) convention.
  std::vector<int> index(n, -1), lowlink(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<std::vector<int>> emitted;

  struct Frame {
    int v;
    int64_t edge;
  };
  std::vector<Frame> dfs;
  int next_index = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    dfs.push_back({root, P.row_ptr[root]});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!dfs.empty()) {
      Frame& f = dfs.back();
      if (f.edge < P.row_ptr[f.v + 1]) {
        int w = P.col[f.edge++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          dfs.push_back({w, P.row_ptr[w]});
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
            comp[w] = static_cast<int>(emitted.size());
            members.push_back(w);
          } while (w != v);
          emitted.push_back(std::move(members));
        }
      }
    }
  }

  ClassDecomposition decomp;
  decomp.class_of.assign(n, -1);
  int num_classes = static_cast<int>(emitted.size());
  decomp.classes.resize(num_classes);
  for (int e = 0; e < num_classes; ++e) {
    int topo = num_classes - 1 - e;
    auto& cls = decomp.classes[topo];
    cls.states = std::move(emitted[e]);
    std::sort(cls.states.begin(), cls.states.end());
    for (int s : cls.states) decomp.class_of[s] = topo;
  }
  for (auto& cls : decomp.classes) {
    bool final = true;
    for (int i : cls.states) {
      double inside = 0.0;
      for (int64_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
        if (decomp.class_of[P.col[k]] == decomp.class_of[i])
          inside += P.val[k];
      if (1.0 - inside > kFinalClassTol) {
        final = false;
        break;
      }
    }
    cls.final = final;
  }
  return decomp;
}

StationaryDistribution stationary(const SparseMatrix& P_FF, LinearMethod method,
                                  const ChainSolveOptions& opts) {
  std::vector<int> states(P_FF.n);
  std::iota(states.begin(), states.end(), 0);
  std::vector<int32_t> scratch(P_FF.n, -1);
  return stationary_block(local_block(P_FF, states, scratch), method, opts);
}

std::vector<double> solve_transient(const SparseMatrix& P_TT,
                                    std::span<const double> c,
                                    LinearMethod method,
                                    const ChainSolveOptions& opts) {
  std::vector<int> states(P_TT.n);
  std::iota(states.begin(), states.end(), 0);
  std::vector<int32_t> scratch(P_TT.n, -1);
  return solve_transient_block(local_block(P_TT, states, scratch), c, method,
                               opts);
}

std::vector<int> minimal_final_indices(const ClassDecomposition& decomp) {
  std::vector<int> S;
  for (const auto& cls : decomp.classes)
    if (cls.final) S.push_back(cls.states.front());
  std::sort(S.begin(), S.end());
  return S;
}

std::pair<std::vector<double>, std::vector<double>> solve_eta_v(
    const SparseMatrix& P, std::span<const double> r,
    const std::vector<int>& S, const ChainSolveOptions& opts) {
  const int n = P.n;
  ClassDecomposition decomp = decompose(P);

  std::vector<int> pin_of_class(decomp.classes.size(), -1);
  int pins = 0;
  for (int s : S) {
    if (s < 0 || s >= n) throw ChainError("pin state out of range");
    int c = decomp.class_of[s];
    if (!decomp.classes[c].final)
      throw ChainError("pin state " + std::to_string(s) +
                       " lies in a transient class");
    if (pin_of_class[c] != -1)
      throw ChainError("two pin states in one final class");
    pin_of_class[c] = s;
    ++pins;
  }
  if (pins != decomp.num_final())
    throw ChainError("pin set must hold exactly one state per final class");

  std::vector<double> eta(n, 0.0), v(n, 0.0);
  std::vector<int32_t> scratch(n, -1);

  // Reverse topological order: every out-of-class arc of a transient class
  // points to an already-solved later class.
  for (auto it = decomp.classes.rbegin(); it != decomp.classes.rend(); ++it) {
    const auto& cls = *it;
    const auto& states = cls.states;
    int m = static_cast<int>(states.size());
    if (cls.final) {
      int pin_state = pin_of_class[decomp.class_of[states[0]]];
      if (m == 1) {
        eta[states[0]] = r[states[0]];
        v[states[0]] = 0.0;
        continue;
      }
      LocalBlock blk = local_block(P, states, scratch);
      int pinned = static_cast<int>(
          std::lower_bound(states.begin(), states.end(), pin_state) -
          states.begin());
      std::vector<double> r_local(m);
      for (int li = 0; li < m; ++li) r_local[li] = r[states[li]];

      FinalClassMethod fm = opts.final_method;
      LinearMethod lm = opts.linear_method;
      if (fm == FinalClassMethod::kAuto) {
        if (m > opts.sor_size_cutoff) {
          fm = FinalClassMethod::kMethodA;
          lm = LinearMethod::kSor;
        } else {
          fm = FinalClassMethod::kMethodB;
        }
      }
      double eta_bar;
      std::vector<double> v_local;
      if (fm == FinalClassMethod::kMethodB) {
        std::tie(eta_bar, v_local) = final_bordered_block(blk, r_local, pinned);
      } else {
        try {
          StationaryDistribution pi = stationary_block(blk, lm, opts);
          eta_bar = 0.0;
          for (int li = 0; li < m; ++li) eta_bar += pi[li] * r_local[li];
          v_local = final_bias_block(blk, r_local, eta_bar, pinned, lm, opts);
        } catch (const ChainError&) {
          // Slowly mixing or near-periodic classes can exhaust the sweep
          // caps; under automatic selection the bordered direct solve is the
          // fallback. An explicit method request propagates the failure.
          if (opts.final_method != FinalClassMethod::kAuto) throw;
          std::tie(eta_bar, v_local) =
              final_bordered_block(blk, r_local, pinned);
        }
      }
      // Re-anchor so the pinned coordinate is exactly zero.
      double shift = v_local[pinned];
      for (int li = 0; li < m; ++li) {
        eta[states[li]] = eta_bar;
        v[states[li]] = li == pinned ? 0.0 : v_local[li] - shift;
      }
    } else {
      LocalBlock blk = local_block(P, states, scratch);
      std::vector<double> c_eta(m, 0.0), c_v(m);
      for (int li = 0; li < m; ++li) {
        int i = states[li];
        double ce = 0.0, cv = 0.0;
        for (int64_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) {
          if (decomp.class_of[P.col[k]] == decomp.class_of[i]) continue;
          ce += P.val[k] * eta[P.col[k]];
          cv += P.val[k] * v[P.col[k]];
        }
        c_eta[li] = ce;
        c_v[li] = cv;
      }
      std::vector<double> eta_local =
          solve_transient_block(blk, c_eta, opts.linear_method, opts);
      for (int li = 0; li < m; ++li) eta[states[li]] = eta_local[li];
      for (int li = 0; li < m; ++li)
        c_v[li] += r[states[li]] - eta[states[li]];
      std::vector<double> v_local =
          solve_transient_block(blk, c_v, opts.linear_method, opts);
      for (int li = 0; li < m; ++li) v[states[li]] = v_local[li];
    }
  }
  return {std::move(eta), std::move(v)};
}

std::vector<double> mean_payoff_fixed_pair(const SparseMatrix& P,
                                           std::span<const double> r,
                                           const ChainSolveOptions& opts) {
  const int n = P.n;
  ClassDecomposition decomp = decompose(P);
  std::vector<double> eta(n, 0.0);
  std::vector<int32_t> scratch(n, -1);
  for (auto it = decomp.classes.rbegin(); it != decomp.classes.rend(); ++it) {
    const auto& cls = *it;
    int m = static_cast<int>(cls.states.size());
    if (cls.final) {
      if (m == 1) {
        eta[cls.states[0]] = r[cls.states[0]];
        continue;
      }
      LocalBlock blk = local_block(P, cls.states, scratch);
      LinearMethod lm = opts.linear_method;
      if (opts.final_method == FinalClassMethod::kAuto)
        lm = m > opts.sor_size_cutoff ? LinearMethod::kSor
                                      : LinearMethod::kDirect;
      StationaryDistribution pi;
      try {
        pi = stationary_block(blk, lm, opts);
      } catch (const ChainError&) {
        if (opts.final_method != FinalClassMethod::kAuto ||
            lm == LinearMethod::kDirect)
          throw;
        pi = stationary_block(blk, LinearMethod::kDirect, opts);
      }
      double eta_bar = 0.0;
      for (int li = 0; li < m; ++li) eta_bar += pi[li] * r[cls.states[li]];
      for (int s : cls.states) eta[s] = eta_bar;
    } else {
      LocalBlock blk = local_block(P, cls.states, scratch);
      std::vector<double> c_eta(m, 0.0);
      for (int li = 0; li < m; ++li) {
        int i = cls.states[li];
        double ce = 0.0;
        for (int64_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
          if (decomp.class_of[P.col[k]] != decomp.class_of[i])
            ce += P.val[k] * eta[P.col[k]];
        c_eta[li] = ce;
      }
      std::vector<double> eta_local =
          solve_transient_block(blk, c_eta, opts.linear_method, opts);
      for (int li = 0; li < m; ++li) eta[cls.states[li]] = eta_local[li];
    }
  }
  return eta;
}

void validate_max_strategy(const OnePlayerGame& g, const MaxStrategy& delta) {
  if (static_cast<int>(delta.delta.size()) != g.num_states())
    throw GameError("MAX strategy has wrong length");
  for (int i = 0; i < g.num_states(); ++i)
    if (delta.delta[i] < 0 || delta.delta[i] >= g.num_actions(i))
      throw GameError("MAX strategy action out of range at state " +
                      std::to_string(i));
}

std::pair<SparseMatrix, std::vector<double>> fix_pair(
    const OnePlayerGame& g, const MaxStrategy& delta) {
  validate_max_strategy(g, delta);
  SparseMatrix P;
  P.n = g.num_states();
  P.row_ptr.assign(P.n + 1, 0);
  std::vector<double> r(P.n);
  for (int i = 0; i < P.n; ++i) {
    auto row = g.row(i, delta.delta[i]);
    r[i] = g.reward(i, delta.delta[i]);
    for (const auto& e : row) {
      P.col.push_back(e.target);
      P.val.push_back(e.prob);
    }
    P.row_ptr[i + 1] = static_cast<int64_t>(P.col.size());
  }
  return {std::move(P), std::move(r)};
}

}  // namespace mpg
