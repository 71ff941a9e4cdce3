#include "mmp/matrix_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace mmp {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

Matrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("matrix file is empty");
  std::istringstream header(line);
  long long m = 0, n = 0;
  if (!(header >> m >> n) || m < 1 || n < 1)
    throw std::runtime_error("bad matrix header '" + line + "' (expected \"m n\")");

  Matrix out(m, n);
  for (long long i = 0; i < m; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("expected " + std::to_string(m) + " rows, got " + std::to_string(i));
    std::istringstream row(line);
    for (long long j = 0; j < n; ++j) {
      if (!(row >> out(i, j)))
        throw std::runtime_error("row " + std::to_string(i + 1) + " has fewer than " +
                                 std::to_string(n) + " values");
    }
    double extra = 0.0;
    if (row >> extra)
      throw std::runtime_error("row " + std::to_string(i + 1) + " has more than " +
                               std::to_string(n) + " values");
  }
  return out;
}

Matrix read_matrix_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_matrix(in);
}

Vector read_vector_file(const std::filesystem::path& path) {
  Matrix m = read_matrix_file(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw std::runtime_error(path.string() + " is not a vector (header must be \"m 1\" or \"1 m\")");
}

void write_matrix(std::ostream& out, const Matrix& matrix) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << matrix.rows() << ' ' << matrix.cols() << '\n';
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) out << (j ? " " : "") << matrix(i, j);
    out << '\n';
  }
  out.precision(old_precision);
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_matrix(out, matrix);
}

}  // namespace mmp
