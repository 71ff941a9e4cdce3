#ifndef MMP_SOLVERS_HPP
#define MMP_SOLVERS_HPP

#include "mmp/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmp {

struct SolverConfig {
  Index sparsity = 1;   // K
  Index expansion = 1;  // L, children per path
  /// Breadth-first pruning cap; unset means no pruning.
  std::optional<std::size_t> max_candidates_per_iter;
  /// Depth-first candidate budget.
  std::uint64_t max_paths = 1;
  /// Depth-first stop threshold on the residual norm squared. Unset means
  /// 1e-12 * ||y||^2.
  std::optional<double> epsilon;
  /// Keep the canonical supports of every candidate set (breadth-first only).
  bool record_trace = false;
};

enum class Termination { budget, epsilon, complete };
std::string_view to_string(Termination t);

struct SearchStats {
  /// Breadth-first: size of S^k after merging and pruning. Depth-first:
  /// distinct depth-k prefixes visited. One entry per completed iteration.
  std::vector<std::size_t> candidates_per_iteration;
  /// Number of least-squares refits (breadth-first, OMP) or full-depth
  /// candidates traced (depth-first).
  std::size_t paths_explored = 0;
  Termination terminated_by = Termination::complete;
  /// trace[k] holds the canonical supports of S^k (k = 0..K) when requested.
  std::vector<std::vector<Support>> trace;
};

struct RecoveryOutput {
  Support support;      // ascending
  Vector coefficients;  // aligned with support
  double residual_norm_sq = 0.0;
  bool partial = false;
  SearchStats stats;

  /// Length-n estimate, zero off the support.
  Vector dense(Index n) const;
};

/// Every path hit rank deficiency before reaching depth K. Carries the best
/// path that was still alive.
class PartialRecovery : public std::runtime_error {
 public:
  explicit PartialRecovery(RecoveryOutput best);
  const RecoveryOutput& best() const noexcept { return best_; }

 private:
  RecoveryOutput best_;
};

/// Breadth-first multipath matching pursuit with path merging.
RecoveryOutput mmp_bf(const SensingMatrix& matrix, const Vector& y, const SolverConfig& config);

/// Depth-first multipath matching pursuit using the modulo search order.
RecoveryOutput mmp_df(const SensingMatrix& matrix, const Vector& y, const SolverConfig& config);

RecoveryOutput omp(const SensingMatrix& matrix, const Vector& y, Index sparsity);

/// Least squares on a known support.
RecoveryOutput oracle_ls(const SensingMatrix& matrix, const Vector& y, const Support& true_support);

/// Layer orders (c_1..c_K), each in 1..L, of the ell-th depth-first candidate:
/// the base-L digits of ell - 1, least significant first, plus one.
std::vector<Index> compute_ck(std::uint64_t ell, Index L, Index K);

/// Inverse of compute_ck: 1 + sum (c_k - 1) L^(k-1).
std::uint64_t candidate_order(const std::vector<Index>& layers, Index L);

/// L^K, saturated at UINT64_MAX.
std::uint64_t layer_count(Index L, Index K);

}  // namespace mmp

#endif  // MMP_SOLVERS_HPP
