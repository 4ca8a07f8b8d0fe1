#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mpg/game.hpp"

namespace mpg {

inline constexpr double kFinalClassTol = 1e-12;

/// Row-compressed nonnegative matrix; rows substochastic.
struct SparseMatrix {
  int n = 0;
  std::vector<int64_t> row_ptr;  // n+1
  std::vector<int32_t> col;
  std::vector<double> val;

  std::span<const int32_t> row_cols(int i) const {
    return {col.data() + row_ptr[i],
            static_cast<size_t>(row_ptr[i + 1] - row_ptr[i])};
  }
  double row_sum(int i) const {
    double s = 0.0;
    for (int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k];
    return s;
  }
  bool stochastic(double tol = kRowSumTol) const;
};

/// Irreducible classes of a stochastic (or substochastic) matrix in
/// topological order: all arcs go from earlier classes to later ones
/// (block-upper-triangular convention), so final classes sit at the end of
/// every chain of arcs. Within a class, states keep their original order.
struct ClassDecomposition {
  struct Class {
    std::vector<int> states;
    bool final = false;
  };
  std::vector<Class> classes;
  std::vector<int> class_of;  // state -> class index

  int num_final() const {
    int k = 0;
    for (const auto& c : classes) k += c.final;
    return k;
  }
};

using StationaryDistribution = std::vector<double>;

enum class LinearMethod { kDirect, kSor };
enum class FinalClassMethod {
  kAuto,     // method A + SOR above the size cutoff, method B direct below
  kMethodA,  // stationary distribution, then pinned in-class bias solve
  kMethodB,  // bordered direct system with unknown scalar eta
};

struct ChainSolveOptions {
  FinalClassMethod final_method = FinalClassMethod::kAuto;
  LinearMethod linear_method = LinearMethod::kDirect;  // transient blocks
  // With kAuto, final classes larger than this use method A with SOR.
  int sor_size_cutoff = 64;
  double sor_omega = 1.2;
  double sor_tol = 1e-13;
  int sor_max_sweep_factor = 100;  // max sweeps = factor * class size
};

class ChainError : public GameError {
 public:
  using GameError::GameError;
};

/// Tarjan SCC decomposition with final/transient flags (a class is final iff
/// every row keeps its full mass inside the class, within kFinalClassTol).
ClassDecomposition decompose(const SparseMatrix& P);

/// Stationary distribution of an irreducible stochastic matrix.
StationaryDistribution stationary(const SparseMatrix& P_FF, LinearMethod method,
                                  const ChainSolveOptions& opts = {});

/// Unique solution of x = P_TT x + c for a matrix whose classes are all
/// transient (spectral radius < 1).
std::vector<double> solve_transient(const SparseMatrix& P_TT,
                                    std::span<const double> c,
                                    LinearMethod method,
                                    const ChainSolveOptions& opts = {});

/// Unique (eta, v) with eta = P eta, eta + v = P v + r, v_S = 0, where S holds
/// exactly one state per final class of P.
std::pair<std::vector<double>, std::vector<double>> solve_eta_v(
    const SparseMatrix& P, std::span<const double> r,
    const std::vector<int>& S, const ChainSolveOptions& opts = {});

/// The eta component only (mean payoff of the fixed pair); used by oracles.
std::vector<double> mean_payoff_fixed_pair(const SparseMatrix& P,
                                           std::span<const double> r,
                                           const ChainSolveOptions& opts = {});

/// Minimal state index of each final class, ascending (the default pin set S).
std::vector<int> minimal_final_indices(const ClassDecomposition& decomp);

void validate_max_strategy(const OnePlayerGame& g, const MaxStrategy& delta);

/// Fixes a one-player strategy: P row i and r_i come from action delta(i).
std::pair<SparseMatrix, std::vector<double>> fix_pair(const OnePlayerGame& g,
                                                      const MaxStrategy& delta);

}  // namespace mpg
