#include "mmp/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mmp {

namespace {

constexpr double kRankThreshold = 1e-12;
// Pivoted-QR diagonal ratios below this are confirmed with an SVD of R.
constexpr double kRankScreen = 1e-6;

void require_distinct_in_range(const Support& support, Index n) {
  Support sorted = support;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("support has repeated column " + to_string(support));
  if (!sorted.empty() && (sorted.front() < 0 || sorted.back() >= n))
    throw std::out_of_range("support " + to_string(support) + " outside column range");
}

}  // namespace

std::string to_string(const Support& support) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < support.size(); ++i) os << (i ? "," : "") << support[i];
  os << '}';
  return os.str();
}

RankDeficient::RankDeficient(Support support)
    : std::runtime_error("rank-deficient column subset " + to_string(support)),
      support_(std::move(support)) {}

SensingMatrix::SensingMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1)
    throw std::invalid_argument("sensing matrix must have at least one row and column");
  if (!entries_.allFinite()) throw std::invalid_argument("sensing matrix has non-finite entries");
}

Matrix SensingMatrix::columns(const Support& support) const {
  Matrix sub(rows(), static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Index>(j)) = entries_.col(support[j]);
  return sub;
}

SparseSignal SparseSignal::from_values(Vector values) {
  SparseSignal s{std::move(values), {}};
  for (Index i = 0; i < s.values.size(); ++i)
    if (s.values(i) != 0.0) s.support.push_back(i);
  return s;
}

Vector correlate(const SensingMatrix& matrix, const Vector& residual) {
  if (residual.size() != matrix.rows())
    throw DimensionMismatch("residual length " + std::to_string(residual.size()) +
                            " does not match m = " + std::to_string(matrix.rows()));
  return (matrix.entries().transpose() * residual).cwiseAbs();
}

Support top_l_indices(const Vector& correlations, Index L, const Support& exclude) {
  const Index n = correlations.size();
  std::vector<bool> excluded(static_cast<std::size_t>(n), false);
  for (Index e : exclude) {
    if (e < 0 || e >= n) throw std::out_of_range("excluded index outside column range");
    excluded[static_cast<std::size_t>(e)] = true;
  }
  Support pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    if (!excluded[static_cast<std::size_t>(i)]) pool.push_back(i);

  if (L < 1 || L > static_cast<Index>(pool.size()))
    throw std::invalid_argument("cannot select " + std::to_string(L) + " indices from " +
                                std::to_string(pool.size()) + " available");

  auto by_magnitude = [&](Index a, Index b) {
    if (correlations(a) != correlations(b)) return correlations(a) > correlations(b);
    return a < b;
  };
  std::partial_sort(pool.begin(), pool.begin() + L, pool.end(), by_magnitude);
  pool.resize(static_cast<std::size_t>(L));
  return pool;
}

LeastSquaresFit least_squares_project(const SensingMatrix& matrix, const Support& support,
                                      const Vector& y) {
  if (y.size() != matrix.rows())
    throw DimensionMismatch("measurement length " + std::to_string(y.size()) +
                            " does not match m = " + std::to_string(matrix.rows()));
  require_distinct_in_range(support, matrix.cols());

  LeastSquaresFit fit;
  if (support.empty()) {
    fit.coefficients = Vector(0);
    fit.residual = y;
    fit.residual_norm_sq = y.squaredNorm();
    return fit;
  }
  if (static_cast<Index>(support.size()) > matrix.rows()) throw RankDeficient(support);

  const Matrix sub = matrix.columns(support);
  const Eigen::ColPivHouseholderQR<Matrix> qr(sub);
  const Index k = sub.cols();
  const Vector diag = qr.matrixR().diagonal().head(k).cwiseAbs();
  const double largest = diag.maxCoeff();
  if (!(largest > 0.0)) throw RankDeficient(support);
  if (diag.minCoeff() < kRankScreen * largest) {
    const Matrix r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Vector sv = Eigen::JacobiSVD<Matrix>(r).singularValues();
    if (sv(k - 1) < kRankThreshold * sv(0)) throw RankDeficient(support);
  }

  fit.coefficients = qr.solve(y);
  fit.residual = y - sub * fit.coefficients;
  fit.residual_norm_sq = fit.residual.squaredNorm();
  return fit;
}

Path::Path(Support indices, Support canonical, LeastSquaresFit fit)
    : indices_(std::move(indices)), canonical_(std::move(canonical)), fit_(std::move(fit)) {}

Path Path::root(const Vector& y) {
  return Path({}, {}, LeastSquaresFit{Vector(0), y, y.squaredNorm()});
}

bool Path::contains(Index column) const {
  return std::binary_search(canonical_.begin(), canonical_.end(), column);
}

Path extend_path(const Path& parent, Index new_index, const SensingMatrix& matrix, const Vector& y) {
  if (parent.contains(new_index))
    throw std::invalid_argument("column " + std::to_string(new_index) + " already on path " +
                                to_string(parent.canonical()));
  Support indices = parent.indices();
  indices.push_back(new_index);
  Support canonical = parent.canonical();
  canonical.insert(std::upper_bound(canonical.begin(), canonical.end(), new_index), new_index);
  LeastSquaresFit fit = least_squares_project(matrix, canonical, y);
  return Path(std::move(indices), std::move(canonical), std::move(fit));
}

bool CandidateSet::insert(Path path) {
  if (!seen_.insert(path.canonical()).second) return false;
  paths_.push_back(std::move(path));
  return true;
}

void CandidateSet::prune(std::size_t limit) {
  if (paths_.size() <= limit) return;
  std::vector<std::size_t> order(paths_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return better_path(paths_[a], paths_[b]); });
  order.resize(limit);
  // Survivors stay in insertion order.
  std::sort(order.begin(), order.end());
  std::vector<Path> kept;
  kept.reserve(limit);
  seen_.clear();
  for (std::size_t i : order) {
    seen_.insert(paths_[i].canonical());
    kept.push_back(std::move(paths_[i]));
  }
  paths_ = std::move(kept);
}

bool better_path(const Path& a, const Path& b) {
  if (a.residual_norm_sq() != b.residual_norm_sq()) return a.residual_norm_sq() < b.residual_norm_sq();
  return a.canonical() < b.canonical();
}

}  // namespace mmp
