#include "mmp/solvers.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace mmp {

namespace {

void validate(const SensingMatrix& matrix, const Vector& y, const SolverConfig& config) {
  if (y.size() != matrix.rows())
    throw DimensionMismatch("measurement length " + std::to_string(y.size()) +
                            " does not match m = " + std::to_string(matrix.rows()));
  if (config.sparsity < 1) throw std::invalid_argument("sparsity K must be at least 1");
  if (config.sparsity > matrix.rows())
    throw std::invalid_argument("sparsity K = " + std::to_string(config.sparsity) +
                                " exceeds m = " + std::to_string(matrix.rows()));
  if (config.sparsity > matrix.cols())
    throw std::invalid_argument("sparsity K exceeds n");
  if (config.expansion < 1 || config.expansion > matrix.cols())
    throw std::invalid_argument("expansion L must be in [1, n]");
  if (config.epsilon && *config.epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
  if (config.max_candidates_per_iter && *config.max_candidates_per_iter < 1)
    throw std::invalid_argument("candidate cap must be at least 1");
}

RecoveryOutput output_from(const Path& path, SearchStats stats) {
  RecoveryOutput out;
  out.support = path.canonical();
  out.coefficients = path.coefficients();
  out.residual_norm_sq = path.residual_norm_sq();
  out.partial = false;
  out.stats = std::move(stats);
  return out;
}

const Path& best_of(const std::vector<Path>& paths) {
  return *std::min_element(paths.begin(), paths.end(), better_path);
}

std::vector<Support> canonical_supports(const CandidateSet& set) {
  std::vector<Support> out;
  out.reserve(set.size());
  for (const Path& p : set.paths()) out.push_back(p.canonical());
  return out;
}

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::budget: return "budget";
    case Termination::epsilon: return "epsilon";
    case Termination::complete: return "complete";
  }
  return "unknown";
}

Vector RecoveryOutput::dense(Index n) const {
  Vector x = Vector::Zero(n);
  for (std::size_t j = 0; j < support.size(); ++j) x(support[j]) = coefficients(static_cast<Index>(j));
  return x;
}

PartialRecovery::PartialRecovery(RecoveryOutput best)
    : std::runtime_error("search ended below target sparsity at depth " +
                         std::to_string(best.support.size()) + " (rank deficiency)"),
      best_(std::move(best)) {
  best_.partial = true;
}

RecoveryOutput mmp_bf(const SensingMatrix& matrix, const Vector& y, const SolverConfig& config) {
  validate(matrix, y, config);
  const Index n = matrix.cols();

  SearchStats stats;
  CandidateSet current(0);
  current.insert(Path::root(y));
  if (config.record_trace) stats.trace.push_back(canonical_supports(current));

  for (Index k = 1; k <= config.sparsity; ++k) {
    CandidateSet next(static_cast<int>(k));
    // Supports that failed the rank check; never retried within the iteration.
    std::set<Support> rejected;

    for (const Path& parent : current.paths()) {
      const Index available = n - parent.depth();
      const Index width = std::min(config.expansion, available);
      const Support chosen = top_l_indices(correlate(matrix, parent.residual()), width, parent.indices());
      for (Index column : chosen) {
        Support canonical = parent.canonical();
        canonical.insert(std::upper_bound(canonical.begin(), canonical.end(), column), column);
        if (next.contains(canonical) || rejected.count(canonical)) continue;
        try {
          ++stats.paths_explored;
          next.insert(extend_path(parent, column, matrix, y));
        } catch (const RankDeficient&) {
          rejected.insert(std::move(canonical));
        }
      }
    }

    if (next.empty()) {
      RecoveryOutput partial = output_from(best_of(current.paths()), std::move(stats));
      throw PartialRecovery(std::move(partial));
    }
    if (config.max_candidates_per_iter) next.prune(*config.max_candidates_per_iter);
    stats.candidates_per_iteration.push_back(next.size());
    if (config.record_trace) stats.trace.push_back(canonical_supports(next));
    current = std::move(next);
  }

  stats.terminated_by = Termination::complete;
  return output_from(best_of(current.paths()), std::move(stats));
}

std::uint64_t layer_count(Index L, Index K) {
  if (L < 1 || K < 0) throw std::invalid_argument("layer_count needs L >= 1, K >= 0");
  std::uint64_t total = 1;
  for (Index k = 0; k < K; ++k) {
    if (total > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(L))
      return std::numeric_limits<std::uint64_t>::max();
    total *= static_cast<std::uint64_t>(L);
  }
  return total;
}

std::vector<Index> compute_ck(std::uint64_t ell, Index L, Index K) {
  if (L < 1 || K < 1) throw std::invalid_argument("compute_ck needs L >= 1 and K >= 1");
  if (ell < 1 || ell > layer_count(L, K))
    throw std::out_of_range("candidate order " + std::to_string(ell) + " outside [1, L^K]");
  std::vector<Index> layers(static_cast<std::size_t>(K));
  std::uint64_t rest = ell - 1;
  const auto base = static_cast<std::uint64_t>(L);
  for (auto& c : layers) {
    c = static_cast<Index>(rest % base) + 1;
    rest /= base;
  }
  return layers;
}

std::uint64_t candidate_order(const std::vector<Index>& layers, Index L) {
  if (L < 1) throw std::invalid_argument("candidate_order needs L >= 1");
  if (layer_count(L, static_cast<Index>(layers.size())) == std::numeric_limits<std::uint64_t>::max())
    throw std::overflow_error("L^K does not fit in 64 bits");
  std::uint64_t ell = 1;
  std::uint64_t weight = 1;
  for (Index c : layers) {
    if (c < 1 || c > L) throw std::out_of_range("layer order " + std::to_string(c) + " outside [1, L]");
    ell += static_cast<std::uint64_t>(c - 1) * weight;
    weight *= static_cast<std::uint64_t>(L);
  }
  return ell;
}

RecoveryOutput mmp_df(const SensingMatrix& matrix, const Vector& y, const SolverConfig& config) {
  validate(matrix, y, config);
  if (config.max_paths < 1) throw std::invalid_argument("candidate budget N_max must be at least 1");
  const Index K = config.sparsity;
  const Index L = config.expansion;
  const double epsilon = config.epsilon.value_or(1e-12 * y.squaredNorm());
  const std::uint64_t last = std::min(config.max_paths, layer_count(L, K));

  SearchStats stats;
  std::vector<std::set<Support>> prefixes(static_cast<std::size_t>(K));
  std::optional<Path> best;
  std::optional<Path> deepest;  // best partial path, for the all-rank-deficient case

  double rho = std::numeric_limits<double>::infinity();
  std::uint64_t ell = 0;
  while (ell < last && epsilon < rho) {
    ++ell;
    ++stats.paths_explored;
    const std::vector<Index> layers = compute_ck(ell, L, K);
    Path path = Path::root(y);
    bool complete = true;
    for (Index k = 0; k < K; ++k) {
      const Index rank = layers[static_cast<std::size_t>(k)];
      if (rank > matrix.cols() - path.depth()) {
        complete = false;
        break;
      }
      const Support ranked = top_l_indices(correlate(matrix, path.residual()), rank, path.indices());
      try {
        path = extend_path(path, ranked.back(), matrix, y);
      } catch (const RankDeficient&) {
        complete = false;
        break;
      }
      prefixes[static_cast<std::size_t>(k)].insert(path.canonical());
    }
    if (!complete) {
      if (!deepest || path.depth() > deepest->depth() ||
          (path.depth() == deepest->depth() && better_path(path, *deepest)))
        deepest = path;
      continue;
    }
    if (!best || better_path(path, *best)) {
      best = path;
      rho = path.residual_norm_sq();
    }
  }

  for (const auto& layer : prefixes)
    if (!layer.empty()) stats.candidates_per_iteration.push_back(layer.size());

  if (!best) {
    RecoveryOutput partial = output_from(deepest ? *deepest : Path::root(y), std::move(stats));
    throw PartialRecovery(std::move(partial));
  }
  if (rho <= epsilon)
    stats.terminated_by = Termination::epsilon;
  else if (ell == layer_count(L, K))
    stats.terminated_by = Termination::complete;
  else
    stats.terminated_by = Termination::budget;
  return output_from(*best, std::move(stats));
}

RecoveryOutput omp(const SensingMatrix& matrix, const Vector& y, Index sparsity) {
  SolverConfig config;
  config.sparsity = sparsity;
  validate(matrix, y, config);

  SearchStats stats;
  Path path = Path::root(y);
  for (Index k = 1; k <= sparsity; ++k) {
    const Support best = top_l_indices(correlate(matrix, path.residual()), 1, path.indices());
    try {
      ++stats.paths_explored;
      path = extend_path(path, best.front(), matrix, y);
    } catch (const RankDeficient&) {
      throw PartialRecovery(output_from(path, std::move(stats)));
    }
    stats.candidates_per_iteration.push_back(1);
  }
  stats.terminated_by = Termination::complete;
  return output_from(path, std::move(stats));
}

RecoveryOutput oracle_ls(const SensingMatrix& matrix, const Vector& y, const Support& true_support) {
  Support support = true_support;
  std::sort(support.begin(), support.end());
  LeastSquaresFit fit = least_squares_project(matrix, support, y);

  RecoveryOutput out;
  out.support = std::move(support);
  out.coefficients = std::move(fit.coefficients);
  out.residual_norm_sq = fit.residual_norm_sq;
  out.stats.paths_explored = 1;
  out.stats.terminated_by = Termination::complete;
  return out;
}

}  // namespace mmp
