#ifndef MMP_ANALYSIS_HPP
#define MMP_ANALYSIS_HPP

#include "mmp/core.hpp"
#include "mmp/random.hpp"
#include "mmp/solvers.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mmp {

/// Largest number of column subsets rip_constant will enumerate.
inline constexpr std::uint64_t kMaxRipSubsets = 1'000'000;

class GuardExceeded : public std::runtime_error {
 public:
  GuardExceeded(Index n, Index order, std::uint64_t subsets);
  std::uint64_t subsets() const noexcept { return subsets_; }

 private:
  std::uint64_t subsets_;
};

/// C(n, k), saturated at UINT64_MAX.
std::uint64_t subset_count(Index n, Index k);

/// Calls `visit` with every ascending k-subset of {0..n-1} in lexicographic
/// order.
void for_each_subset(Index n, Index k, const std::function<void(const Support&)>& visit);

/// Exact restricted isometry constants delta_1..delta_max_order.
struct RipReport {
  Index m = 0;
  Index n = 0;
  int max_order = 0;
  std::map<int, double> deltas;

  /// delta_0 is 0 (empty support). Throws std::out_of_range for orders not
  /// computed.
  double delta(int order) const;
};

/// max over |S| = order of max(lambda_max(G_S) - 1, 1 - lambda_min(G_S)),
/// with G_S the Gram matrix of the columns in S. Throws GuardExceeded past
/// kMaxRipSubsets subsets.
double rip_constant(const SensingMatrix& matrix, int order);

RipReport rip_report(const SensingMatrix& matrix, int max_order);

/// Noiseless recovery bound on delta_{K+L}: sqrt(L) / (sqrt(K) + 2 sqrt(L)).
double bf_recovery_bound(Index K, Index L);

/// First-iteration bound on delta_{K+L}: sqrt(L) / (sqrt(K) + sqrt(L)).
double first_iter_bound(Index K, Index L);

/// Constants of the noisy support-identification guarantee. A constant whose
/// denominator (or radicand) is not positive is +infinity.
struct GuaranteeConstants {
  double bf_bound = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  double zeta = 0.0;
  double tau = 0.0;
};

GuaranteeConstants noisy_constants(double delta_K, double delta_2K, double delta_KL, Index K, Index L);

/// Upper bound on alpha_L^k, the L-th largest correlation between the
/// residual of an all-true path of length k-1 and the wrong columns.
double lemma_alpha_bound(const RipReport& deltas, Index k, Index K, Index L, double x_rem_norm,
                         double v_norm);

/// Lower bound on beta_1^k, the largest correlation between that residual
/// and the true columns not yet on the path.
double lemma_beta_bound(const RipReport& deltas, Index k, Index K, double x_rem_norm, double v_norm);

/// One alpha/beta observation from an instrumented breadth-first run.
struct BoundTrace {
  Index iteration = 0;
  Support path;  // the all-true parent path s^{k-1}
  double alpha_L = 0.0;
  double beta_1 = 0.0;
  double bound_alpha = 0.0;
  double bound_beta = 0.0;
  bool preconditions_hold = false;
};

/// Recomputes alpha_L^k and beta_1^k for every parent path in `trace`
/// (SearchStats::trace of an mmp_bf run) whose columns all lie in the true
/// support, alongside the two lemma bounds.
std::vector<BoundTrace> trace_selection_bounds(const SensingMatrix& matrix, const Vector& y,
                                               const Vector& x, double v_norm, const RipReport& deltas,
                                               Index K, Index L,
                                               const std::vector<std::vector<Support>>& trace);

struct ResidualBounds {
  double upper_rT = 0.0;      // ||v||^2
  double lower_rGamma = 0.0;  // -infinity when the bound's RIP terms are >= 1
  double actual_rT = 0.0;     // ||P_T^perp y||^2
  double actual_rGamma = 0.0; // ||P_Gamma^perp y||^2
};

/// Residual bounds of the final-stage argument for a candidate support
/// `gamma_set` of size K, plus the actual residual energies.
ResidualBounds residual_bounds(const SensingMatrix& matrix, const RipReport& deltas, const Vector& y,
                               const Support& true_support, const Support& gamma_set, const Vector& x,
                               const Vector& v);
ResidualBounds residual_bounds(const SensingMatrix& matrix, const Vector& y, const Support& true_support,
                               const Support& gamma_set, const Vector& x, const Vector& v);

struct GuaranteeReport {
  bool condition_holds = false;
  bool recovery_exact = false;
  bool consistent = true;
  GuaranteeConstants constants;
  double min_abs_x = 0.0;
  double v_norm = 0.0;
  double error_norm = 0.0;   // ||x - x_hat||
  double stability_bound = 0.0;  // tau * ||v||
  RecoveryOutput output;
};

/// Evaluates the support-identification condition with exact deltas, runs
/// mmp_bf, and checks the one-directional implication. With v = 0 the
/// condition is the noiseless one on delta_{K+L}.
GuaranteeReport verify_guarantee(const SensingMatrix& matrix, const Vector& x, const Vector& v,
                                 const SolverConfig& config);
GuaranteeReport verify_guarantee(const SensingMatrix& matrix, const RipReport& deltas, const Vector& x,
                                 const Vector& v, const SolverConfig& config);

// Consequences of RIP, each checked with a 1e-12 relative slack. They return
// true when the premise (delta < 1) fails.

/// (1 - d) ||z|| <= ||Phi_I' Phi_I z|| <= (1 + d) ||z||, d = delta_|I|.
bool gram_bounds_hold(const SensingMatrix& matrix, const RipReport& deltas, const Support& I, const Vector& z);

/// ||Phi_I1' Phi_I2 z|| <= delta_{|I1|+|I2|} ||z|| for disjoint I1, I2.
bool cross_gram_bound_holds(const SensingMatrix& matrix, const RipReport& deltas, const Support& I1,
                            const Support& I2, const Vector& z);

/// ||Phi_I||_2 <= sqrt(1 + delta_{min(m,|I|)}); an empty I means all columns.
/// Only a valid inequality when min(m, |I|) = |I|, i.e. for tall column
/// subsets: a wide matrix can have a spectral norm above every m-column
/// subset's.
bool spectral_norm_bound_holds(const SensingMatrix& matrix, const RipReport& deltas, const Support& I = {});

/// Unit-norm-column frames with small restricted isometry constants, for
/// property tests at sizes where delta can be enumerated. n <= m gives
/// perturbed orthonormal columns, n = m + 1 a perturbed regular simplex, and
/// n > m + 1 a perturbed random harmonic frame.
Matrix incoherent_frame(Index m, Index n, double perturbation, Rng& rng);

struct SuiteConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 200;    // instances that meet the noiseless condition
  std::size_t max_attempts = 20000;
  bool noisy = false;          // add noise and use the zeta condition
};

struct SuiteCounts {
  std::size_t attempts = 0;
  std::size_t instances = 0;        // condition held
  std::size_t recovered = 0;        // ... and mmp_bf returned T
  std::size_t counterexamples = 0;  // condition held, recovery failed
  std::size_t alpha_checks = 0, alpha_violations = 0;
  std::size_t beta_checks = 0, beta_violations = 0;
  std::size_t residual_upper_checks = 0, residual_upper_violations = 0;
  std::size_t residual_lower_checks = 0, residual_lower_violations = 0;
  std::size_t gram_checks = 0, gram_violations = 0;
  std::size_t cross_checks = 0, cross_violations = 0;
  std::size_t spectral_checks = 0, spectral_violations = 0;
  std::size_t stability_checks = 0, stability_violations = 0;
};

/// Draws small instances (m in 8..12, n <= 16, K <= 3, L <= 3), keeps those
/// that satisfy the recovery condition under exact deltas, and counts
/// violations of every checked inequality and implication on them.
SuiteCounts run_implication_suite(const SuiteConfig& config);

}  // namespace mmp

#endif  // MMP_ANALYSIS_HPP
