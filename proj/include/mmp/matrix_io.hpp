#ifndef MMP_MATRIX_IO_HPP
#define MMP_MATRIX_IO_HPP

#include "mmp/core.hpp"

#include <filesystem>
#include <iosfwd>

namespace mmp {

// Text format: header line "m n", then m lines of n whitespace-separated
// decimal values.

Matrix read_matrix(std::istream& in);
Matrix read_matrix_file(const std::filesystem::path& path);

/// Accepts an "m 1" column or a "1 m" row.
Vector read_vector_file(const std::filesystem::path& path);

void write_matrix(std::ostream& out, const Matrix& matrix);
void write_matrix_file(const std::filesystem::path& path, const Matrix& matrix);

}  // namespace mmp

#endif  // MMP_MATRIX_IO_HPP
