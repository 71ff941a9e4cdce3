#include "mmp/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace mmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-12;

// a <= b up to kSlack relative to the larger magnitude involved.
bool leq(double a, double b, double scale = 0.0) {
  return a <= b + kSlack * std::max({std::abs(a), std::abs(b), scale});
}

double ratio_or_inf(double numerator, double denominator) {
  return denominator > 0.0 ? numerator / denominator : kInf;
}

Support set_difference(const Support& a, const Support& b) {
  Support out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Support sorted(Support s) {
  std::sort(s.begin(), s.end());
  return s;
}

Support random_subset(Index n, Index k, Rng& rng) {
  Support all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  return sorted(std::move(all));
}

Vector random_unit(Index size, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector z(size);
  for (Index i = 0; i < size; ++i) z(i) = normal(rng);
  return z / z.norm();
}

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

Matrix random_orthogonal(Index size, Rng& rng) {
  const Eigen::HouseholderQR<Matrix> qr(gaussian(size, size, rng));
  return qr.householderQ();
}

}  // namespace

GuardExceeded::GuardExceeded(Index n, Index order, std::uint64_t subsets)
    : std::runtime_error("exact delta_" + std::to_string(order) + " over n = " + std::to_string(n) +
                         " columns needs " +
                         (subsets == std::numeric_limits<std::uint64_t>::max() ? std::string("> 2^64")
                                                                               : std::to_string(subsets)) +
                         " subsets (limit " + std::to_string(kMaxRipSubsets) +
                         "); use a smaller matrix or a sampling estimate"),
      subsets_(subsets) {}

std::uint64_t subset_count(Index n, Index k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (Index i = 1; i <= k; ++i) {
    // c * (n - k + i) / i stays integral at every step.
    const auto num = static_cast<std::uint64_t>(n - k + i);
    const std::uint64_t g = std::gcd(c, static_cast<std::uint64_t>(i));
    const std::uint64_t cr = c / g;
    const std::uint64_t den = static_cast<std::uint64_t>(i) / g;
    const std::uint64_t numr = num / den;
    if (cr > std::numeric_limits<std::uint64_t>::max() / numr) return std::numeric_limits<std::uint64_t>::max();
    c = cr * numr;
  }
  return c;
}

void for_each_subset(Index n, Index k, const std::function<void(const Support&)>& visit) {
  if (k < 0 || k > n) return;
  Support s(static_cast<std::size_t>(k));
  std::iota(s.begin(), s.end(), Index{0});
  while (true) {
    visit(s);
    Index i = k - 1;
    while (i >= 0 && s[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++s[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
  }
}

double RipReport::delta(int order) const {
  if (order == 0) return 0.0;
  const auto it = deltas.find(order);
  if (it == deltas.end())
    throw std::out_of_range("delta_" + std::to_string(order) + " not in report (max order " +
                            std::to_string(max_order) + ")");
  return it->second;
}

double rip_constant(const SensingMatrix& matrix, int order) {
  const Index n = matrix.cols();
  if (order < 1 || order > n) throw std::invalid_argument("RIP order must be in [1, n]");
  const std::uint64_t count = subset_count(n, order);
  if (count > kMaxRipSubsets) throw GuardExceeded(n, order, count);

  const Matrix gram = matrix.entries().transpose() * matrix.entries();
  Matrix sub(order, order);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(order);
  double worst = 0.0;
  for_each_subset(n, order, [&](const Support& s) {
    for (Index a = 0; a < order; ++a)
      for (Index b = 0; b < order; ++b)
        sub(a, b) = gram(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
    solver.compute(sub, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();  // ascending
    worst = std::max({worst, ev(order - 1) - 1.0, 1.0 - ev(0)});
  });
  return worst;
}

RipReport rip_report(const SensingMatrix& matrix, int max_order) {
  if (max_order < 1 || max_order > matrix.cols())
    throw std::invalid_argument("max order must be in [1, n]");
  RipReport report;
  report.m = matrix.rows();
  report.n = matrix.cols();
  report.max_order = max_order;
  for (int order = 1; order <= max_order; ++order) report.deltas[order] = rip_constant(matrix, order);
  return report;
}

double bf_recovery_bound(Index K, Index L) {
  if (K < 1 || L < 1) throw std::invalid_argument("K and L must be positive");
  const double sk = std::sqrt(static_cast<double>(K));
  const double sl = std::sqrt(static_cast<double>(L));
  return sl / (sk + 2.0 * sl);
}

double first_iter_bound(Index K, Index L) {
  if (K < 1 || L < 1) throw std::invalid_argument("K and L must be positive");
  const double sk = std::sqrt(static_cast<double>(K));
  const double sl = std::sqrt(static_cast<double>(L));
  return sl / (sk + sl);
}

GuaranteeConstants noisy_constants(double delta_K, double delta_2K, double delta_KL, Index K, Index L) {
  for (double d : {delta_K, delta_2K, delta_KL})
    if (!(d >= 0.0 && d < 1.0)) throw std::invalid_argument("restricted isometry constants must lie in [0, 1)");
  if (K < 1 || L < 1) throw std::invalid_argument("K and L must be positive");

  const double sk = std::sqrt(static_cast<double>(K));
  const double sl = std::sqrt(static_cast<double>(L));
  const double slk = std::sqrt(static_cast<double>(L * K));
  const double root = std::sqrt(1.0 + delta_KL);

  GuaranteeConstants c;
  c.bf_bound = bf_recovery_bound(K, L);
  c.gamma = ratio_or_inf(root * (sl + sk), slk - (slk + static_cast<double>(K)) * delta_KL);
  c.mu = ratio_or_inf(root * (1.0 - delta_KL) * (sl + sk), sl - (2.0 * sl + sk) * delta_KL);
  const double q = 1.0 - delta_K;
  const double radicand = ratio_or_inf(2.0 * q * q, q * q * q - (1.0 + delta_K) * delta_2K * delta_2K);
  c.lambda = std::sqrt(radicand);
  c.zeta = std::max({c.gamma, c.mu, c.lambda});
  c.tau = 1.0 / std::sqrt(q);
  return c;
}

double lemma_alpha_bound(const RipReport& deltas, Index k, Index K, Index L, double x_rem_norm,
                         double v_norm) {
  if (k < 1 || k > K || L < 1) throw std::invalid_argument("need 1 <= k <= K and L >= 1");
  const auto d = [&](Index order) { return deltas.delta(static_cast<int>(order)); };
  const double sl = std::sqrt(static_cast<double>(L));
  const double signal = d(L + K - k + 1) + d(L + k - 1) * d(K) / (1.0 - d(k - 1));
  return signal * x_rem_norm / sl + std::sqrt(1.0 + d(L)) * v_norm / sl;
}

double lemma_beta_bound(const RipReport& deltas, Index k, Index K, double x_rem_norm, double v_norm) {
  if (k < 1 || k > K) throw std::invalid_argument("need 1 <= k <= K");
  const auto d = [&](Index order) { return deltas.delta(static_cast<int>(order)); };
  const double remaining = std::sqrt(static_cast<double>(K - k + 1));
  const double signal = 1.0 - d(K - k + 1) - d(K) * d(K) / (1.0 - d(k - 1));
  return signal * x_rem_norm / remaining - std::sqrt(1.0 + d(K - k + 1)) * v_norm / remaining;
}

std::vector<BoundTrace> trace_selection_bounds(const SensingMatrix& matrix, const Vector& y,
                                               const Vector& x, double v_norm, const RipReport& deltas,
                                               Index K, Index L,
                                               const std::vector<std::vector<Support>>& trace) {
  const SparseSignal signal = SparseSignal::from_values(x);
  const Support& truth = signal.support;
  const Index n = matrix.cols();
  std::vector<BoundTrace> out;

  for (Index k = 1; k <= K && k <= static_cast<Index>(trace.size()); ++k) {
    for (const Support& parent : trace[static_cast<std::size_t>(k - 1)]) {
      if (!std::includes(truth.begin(), truth.end(), parent.begin(), parent.end())) continue;
      const Support remaining = set_difference(truth, parent);
      if (remaining.empty()) continue;

      const Vector residual = least_squares_project(matrix, parent, y).residual;
      const Vector corr = correlate(matrix, residual);

      std::vector<double> wrong;
      for (Index i = 0; i < n; ++i)
        if (!std::binary_search(truth.begin(), truth.end(), i)) wrong.push_back(corr(i));
      if (static_cast<Index>(wrong.size()) < L) continue;
      std::nth_element(wrong.begin(), wrong.begin() + (L - 1), wrong.end(), std::greater<>());

      BoundTrace t;
      t.iteration = k;
      t.path = parent;
      t.alpha_L = wrong[static_cast<std::size_t>(L - 1)];
      t.beta_1 = 0.0;
      for (Index i : remaining) t.beta_1 = std::max(t.beta_1, corr(i));

      double rem_sq = 0.0;
      for (Index i : remaining) rem_sq += x(i) * x(i);
      const double x_rem = std::sqrt(rem_sq);
      t.bound_alpha = lemma_alpha_bound(deltas, k, K, L, x_rem, v_norm);
      t.bound_beta = lemma_beta_bound(deltas, k, K, x_rem, v_norm);

      t.preconditions_hold = true;
      for (Index order : {L + K - k + 1, L + k - 1, K, k - 1, K - k + 1, L})
        t.preconditions_hold = t.preconditions_hold && deltas.delta(static_cast<int>(order)) < 1.0;
      out.push_back(std::move(t));
    }
  }
  return out;
}

ResidualBounds residual_bounds(const SensingMatrix& matrix, const RipReport& deltas, const Vector& y,
                               const Support& true_support, const Support& gamma_set, const Vector& x,
                               const Vector& v) {
  const Support truth = sorted(true_support);
  const Support gamma = sorted(gamma_set);
  const Support missing = set_difference(truth, gamma);

  ResidualBounds b;
  b.upper_rT = v.squaredNorm();
  b.actual_rT = least_squares_project(matrix, truth, y).residual_norm_sq;
  b.actual_rGamma = least_squares_project(matrix, gamma, y).residual_norm_sq;

  const auto g = static_cast<int>(gamma.size());
  const auto t = static_cast<int>(missing.size());
  double missing_sq = 0.0;
  for (Index i : missing) missing_sq += x(i) * x(i);

  if (missing.empty()) {
    // Nothing of x is missed; only the noise term remains.
    b.lower_rGamma = -v.squaredNorm();
    return b;
  }
  const double d_t = deltas.delta(t);
  const double d_g = deltas.delta(g);
  const double d_gt = deltas.delta(g + t);
  if (d_t >= 1.0 || d_g >= 1.0 || d_gt >= 1.0) {
    b.lower_rGamma = -kInf;
    return b;
  }
  const double factor = (1.0 - d_t) - (1.0 + d_g) * d_gt * d_gt / ((1.0 - d_g) * (1.0 - d_g));
  b.lower_rGamma = factor * missing_sq - v.squaredNorm();
  return b;
}

ResidualBounds residual_bounds(const SensingMatrix& matrix, const Vector& y, const Support& true_support,
                               const Support& gamma_set, const Vector& x, const Vector& v) {
  const Index order = static_cast<Index>(gamma_set.size() + true_support.size());
  const RipReport deltas = rip_report(matrix, static_cast<int>(std::min(order, matrix.cols())));
  return residual_bounds(matrix, deltas, y, true_support, gamma_set, x, v);
}

GuaranteeReport verify_guarantee(const SensingMatrix& matrix, const RipReport& deltas, const Vector& x,
                                 const Vector& v, const SolverConfig& config) {
  const Index K = config.sparsity;
  const Index L = config.expansion;
  const SparseSignal signal = SparseSignal::from_values(x);
  if (signal.sparsity() != K)
    throw std::invalid_argument("signal has " + std::to_string(signal.sparsity()) + " nonzeros, expected K = " +
                                std::to_string(K));

  GuaranteeReport r;
  r.v_norm = v.norm();
  r.min_abs_x = kInf;
  for (Index i : signal.support) r.min_abs_x = std::min(r.min_abs_x, std::abs(x(i)));

  const double d_K = deltas.delta(static_cast<int>(K));
  const double d_2K = deltas.delta(static_cast<int>(2 * K));
  const double d_KL = deltas.delta(static_cast<int>(K + L));
  if (d_K < 1.0 && d_2K < 1.0 && d_KL < 1.0) {
    r.constants = noisy_constants(d_K, d_2K, d_KL, K, L);
  } else {
    r.constants.bf_bound = bf_recovery_bound(K, L);
    r.constants.gamma = r.constants.mu = r.constants.lambda = r.constants.zeta = kInf;
    r.constants.tau = d_K < 1.0 ? 1.0 / std::sqrt(1.0 - d_K) : kInf;
  }

  if (r.v_norm == 0.0)
    r.condition_holds = d_KL < r.constants.bf_bound;
  else
    r.condition_holds = std::isfinite(r.constants.zeta) && r.min_abs_x >= r.constants.zeta * r.v_norm;

  const Vector y = matrix.entries() * x + v;
  SolverConfig run = config;
  run.record_trace = true;
  try {
    r.output = mmp_bf(matrix, y, run);
  } catch (const PartialRecovery& e) {
    r.output = e.best();
  }
  r.recovery_exact = !r.output.partial && r.output.support == signal.support;
  r.consistent = !(r.condition_holds && !r.recovery_exact);
  r.error_norm = (x - r.output.dense(matrix.cols())).norm();
  r.stability_bound = r.constants.tau * r.v_norm;
  return r;
}

GuaranteeReport verify_guarantee(const SensingMatrix& matrix, const Vector& x, const Vector& v,
                                 const SolverConfig& config) {
  const Index order = std::max(2 * config.sparsity, config.sparsity + config.expansion);
  const RipReport deltas = rip_report(matrix, static_cast<int>(std::min(order, matrix.cols())));
  return verify_guarantee(matrix, deltas, x, v, config);
}

bool gram_bounds_hold(const SensingMatrix& matrix, const RipReport& deltas, const Support& I, const Vector& z) {
  const double d = deltas.delta(static_cast<int>(I.size()));
  if (d >= 1.0) return true;
  const Matrix sub = matrix.columns(I);
  const double image = (sub.transpose() * (sub * z)).norm();
  const double zn = z.norm();
  return leq((1.0 - d) * zn, image, zn) && leq(image, (1.0 + d) * zn, zn);
}

bool cross_gram_bound_holds(const SensingMatrix& matrix, const RipReport& deltas, const Support& I1,
                            const Support& I2, const Vector& z) {
  const double d = deltas.delta(static_cast<int>(I1.size() + I2.size()));
  if (d >= 1.0) return true;
  const double image = (matrix.columns(I1).transpose() * (matrix.columns(I2) * z)).norm();
  return leq(image, d * z.norm(), z.norm());
}

bool spectral_norm_bound_holds(const SensingMatrix& matrix, const RipReport& deltas, const Support& I) {
  const Matrix sub = I.empty() ? matrix.entries() : matrix.columns(I);
  const Index order = std::min(sub.rows(), sub.cols());
  const double d = deltas.delta(static_cast<int>(order));
  const double norm = Eigen::JacobiSVD<Matrix>(sub).singularValues()(0);
  return leq(norm, std::sqrt(1.0 + d), 1.0);
}

Matrix incoherent_frame(Index m, Index n, double perturbation, Rng& rng) {
  if (m < 1 || n < 1) throw std::invalid_argument("frame dimensions must be positive");
  Matrix frame(m, n);
  if (n <= m) {
    const Eigen::HouseholderQR<Matrix> qr(gaussian(m, n, rng));
    frame = qr.householderQ() * Matrix::Identity(m, n);
  } else if (n == m + 1) {
    // Regular simplex: centred basis vectors of R^{m+1}, expressed in an
    // orthonormal basis of the sum-zero hyperplane, then rotated at random.
    Matrix seed = gaussian(n, n, rng);
    seed.col(0).setOnes();
    const Eigen::HouseholderQR<Matrix> qr(seed);
    const Matrix basis = (qr.householderQ() * Matrix::Identity(n, n)).rightCols(m);
    const Matrix centred = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
    frame = random_orthogonal(m, rng) * (basis.transpose() * centred);
  } else {
    // Real harmonic frame: rows are cos/sin pairs of distinct DFT
    // frequencies (plus a constant row when m is odd).
    const Index pairs = m / 2;
    std::vector<Index> freqs;
    for (Index f = 1; 2 * f < n; ++f) freqs.push_back(f);
    if (static_cast<Index>(freqs.size()) < pairs)
      throw std::invalid_argument("not enough frequencies for a harmonic frame");
    std::shuffle(freqs.begin(), freqs.end(), rng);
    Index row = 0;
    if (m % 2 == 1) frame.row(row++).setOnes();
    for (Index p = 0; p < pairs; ++p) {
      for (Index j = 0; j < n; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(freqs[static_cast<std::size_t>(p)] * j) /
                             static_cast<double>(n);
        frame(row, j) = std::cos(angle);
        frame(row + 1, j) = std::sin(angle);
      }
      row += 2;
    }
    frame = random_orthogonal(m, rng) * frame;
  }
  frame += perturbation / std::sqrt(static_cast<double>(m)) * gaussian(m, n, rng);
  for (Index j = 0; j < n; ++j) frame.col(j).normalize();
  return frame;
}

SuiteCounts run_implication_suite(const SuiteConfig& config) {
  SuiteCounts counts;
  std::uniform_int_distribution<Index> pick_m(8, 12);
  std::uniform_int_distribution<Index> pick_small(1, 3);
  std::uniform_int_distribution<int> pick_kind(0, 2);
  std::uniform_real_distribution<double> pick_perturbation(0.0, 0.15);
  std::uniform_real_distribution<double> pick_snr(20.0, 80.0);
  std::normal_distribution<double> normal;

  while (counts.instances < config.trials && counts.attempts < config.max_attempts) {
    Rng rng = make_rng(config.seed, {config.noisy ? 1u : 0u, counts.attempts});
    ++counts.attempts;

    const Index m = pick_m(rng);
    const Index K = pick_small(rng);
    const Index L = pick_small(rng);
    const Index max_order = std::max(2 * K, K + L);
    Index n = 0;
    switch (pick_kind(rng)) {
      case 0: n = std::uniform_int_distribution<Index>(std::max(max_order, m - 3), m)(rng); break;
      case 1: n = m + 1; break;
      default: n = std::uniform_int_distribution<Index>(m + 2, 16)(rng); break;
    }
    const SensingMatrix phi(incoherent_frame(m, n, pick_perturbation(rng), rng));
    const RipReport deltas = rip_report(phi, static_cast<int>(max_order));

    const Support truth = random_subset(n, K, rng);
    Vector x = Vector::Zero(n);
    for (Index i : truth) x(i) = normal(rng);
    Vector v = Vector::Zero(m);
    if (config.noisy) {
      const double sigma = std::pow(10.0, -pick_snr(rng) / 20.0);
      for (Index i = 0; i < m; ++i) v(i) = sigma * normal(rng);
    }

    SolverConfig solver;
    solver.sparsity = K;
    solver.expansion = L;
    const GuaranteeReport report = verify_guarantee(phi, deltas, x, v, solver);
    if (!report.condition_holds) continue;

    ++counts.instances;
    if (report.recovery_exact)
      ++counts.recovered;
    else
      ++counts.counterexamples;

    const Vector y = phi.entries() * x + v;
    const double scale = y.norm();
    for (const BoundTrace& t :
         trace_selection_bounds(phi, y, x, v.norm(), deltas, K, L, report.output.stats.trace)) {
      if (!t.preconditions_hold) continue;
      ++counts.alpha_checks;
      if (!leq(t.alpha_L, t.bound_alpha, scale)) ++counts.alpha_violations;
      ++counts.beta_checks;
      if (!leq(t.bound_beta, t.beta_1, scale)) ++counts.beta_violations;
    }

    const double energy = y.squaredNorm();
    for_each_subset(n, K, [&](const Support& gamma) {
      const ResidualBounds b = residual_bounds(phi, deltas, y, truth, gamma, x, v);
      if (gamma == truth) {
        ++counts.residual_upper_checks;
        if (!leq(b.actual_rT, b.upper_rT, energy)) ++counts.residual_upper_violations;
      }
      if (std::isfinite(b.lower_rGamma)) {
        ++counts.residual_lower_checks;
        if (!leq(b.lower_rGamma, b.actual_rGamma, energy)) ++counts.residual_lower_violations;
      }
    });

    for (Index order = 1; order <= max_order; ++order) {
      const Support I = random_subset(n, order, rng);
      ++counts.gram_checks;
      if (!gram_bounds_hold(phi, deltas, I, random_unit(order, rng))) ++counts.gram_violations;
      ++counts.spectral_checks;
      if (!spectral_norm_bound_holds(phi, deltas, I)) ++counts.spectral_violations;
      if (order >= 2) {
        const Index split = std::uniform_int_distribution<Index>(1, order - 1)(rng);
        const Support I1(I.begin(), I.begin() + split);
        const Support I2(I.begin() + split, I.end());
        ++counts.cross_checks;
        if (!cross_gram_bound_holds(phi, deltas, I1, I2, random_unit(order - split, rng)))
          ++counts.cross_violations;
      }
    }
    if (n <= m) {
      // Whole-matrix form; only meaningful for tall frames.
      RipReport full = deltas;
      full.deltas[static_cast<int>(n)] = rip_constant(phi, static_cast<int>(n));
      ++counts.spectral_checks;
      if (!spectral_norm_bound_holds(phi, full)) ++counts.spectral_violations;
    }

    if (config.noisy) {
      ++counts.stability_checks;
      if (!leq(report.error_norm, report.stability_bound, x.norm())) ++counts.stability_violations;
    }
  }
  return counts;
}

}  // namespace mmp
