#ifndef MMP_CORE_HPP
#define MMP_CORE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Column indices, zero-based. A "support" is kept sorted ascending.
using Support = std::vector<Index>;

std::string to_string(const Support& support);

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when the columns selected by a support are (numerically) linearly
/// dependent: sigma_min < 1e-12 * sigma_max.
class RankDeficient : public std::runtime_error {
 public:
  explicit RankDeficient(Support support);
  const Support& support() const noexcept { return support_; }

 private:
  Support support_;
};

/// Dense m x n sensing matrix. Immutable after construction.
class SensingMatrix {
 public:
  explicit SensingMatrix(Matrix entries);

  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }
  const Matrix& entries() const noexcept { return entries_; }

  auto column(Index i) const { return entries_.col(i); }

  /// Columns listed in `support`, in the given order.
  Matrix columns(const Support& support) const;

 private:
  Matrix entries_;
};

struct SparseSignal {
  Vector values;
  Support support;

  /// Builds the support from the nonzero entries of `values`.
  static SparseSignal from_values(Vector values);
  Index sparsity() const noexcept { return static_cast<Index>(support.size()); }
};

struct Measurement {
  Vector y;
  std::optional<Vector> noise;
};

struct LeastSquaresFit {
  Vector coefficients;  // ordered like the support passed in
  Vector residual;
  double residual_norm_sq = 0.0;
};

/// |<phi_i, r>| for every column i.
Vector correlate(const SensingMatrix& matrix, const Vector& residual);

/// The L largest entries of `correlations` outside `exclude`, in descending
/// magnitude order. Ties go to the smaller index.
Support top_l_indices(const Vector& correlations, Index L, const Support& exclude = {});

/// Least-squares fit of y on the columns in `support`.
LeastSquaresFit least_squares_project(const SensingMatrix& matrix, const Support& support,
                                      const Vector& y);

/// A node of the search tree: the selected columns (selection order), their
/// sorted form, and the least-squares fit on them.
class Path {
 public:
  /// The empty path: no coefficients, residual = y.
  static Path root(const Vector& y);

  const Support& indices() const noexcept { return indices_; }
  const Support& canonical() const noexcept { return canonical_; }
  const Vector& coefficients() const noexcept { return fit_.coefficients; }
  const Vector& residual() const noexcept { return fit_.residual; }
  double residual_norm_sq() const noexcept { return fit_.residual_norm_sq; }
  Index depth() const noexcept { return static_cast<Index>(indices_.size()); }
  bool contains(Index column) const;

  friend bool operator==(const Path& a, const Path& b) { return a.canonical_ == b.canonical_; }

 private:
  friend Path extend_path(const Path&, Index, const SensingMatrix&, const Vector&);
  Path(Support indices, Support canonical, LeastSquaresFit fit);

  Support indices_;
  Support canonical_;
  LeastSquaresFit fit_;
};

/// Child of `parent` with `new_index` appended, refit over the child's
/// canonical support.
Path extend_path(const Path& parent, Index new_index, const SensingMatrix& matrix, const Vector& y);

/// Paths alive at one iteration, pairwise distinct in canonical form.
class CandidateSet {
 public:
  explicit CandidateSet(int iteration = 0) : iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }
  const std::vector<Path>& paths() const noexcept { return paths_; }
  std::size_t size() const noexcept { return paths_.size(); }
  bool empty() const noexcept { return paths_.empty(); }

  bool contains(const Support& canonical) const { return seen_.count(canonical) != 0; }

  /// Adds the path unless one with the same canonical support exists.
  bool insert(Path path);

  /// Keeps the `limit` paths with smallest residual norm (ties: lexicographic
  /// canonical support).
  void prune(std::size_t limit);

 private:
  int iteration_;
  std::vector<Path> paths_;
  std::set<Support> seen_;
};

/// Orders paths by residual norm, then lexicographically by canonical support.
bool better_path(const Path& a, const Path& b);

}  // namespace mmp

#endif  // MMP_CORE_HPP
