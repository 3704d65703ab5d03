#pragma once

#include <filesystem>
#include <iosfwd>

#include "ccinv/sparse_matrix.hpp"

namespace ccinv {

/// Reads a coordinate Matrix Market file (real, integer, pattern or complex field;
/// general, symmetric, skew-symmetric or hermitian symmetry). Indices are 1-based on
/// disk. Symmetric variants are expanded to the full matrix. Real, integer and pattern
/// files produce a RealMatrix; complex files a ComplexMatrix.
AnyMatrix read_matrix_market(std::istream& in);
AnyMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes every stored entry as a general coordinate file, 17 significant digits.
template <Scalar T>
void write_matrix_market(const SparseMatrix<T>& a, std::ostream& out);
template <Scalar T>
void write_matrix_market(const SparseMatrix<T>& a, const std::filesystem::path& path);

void write_matrix_market(const AnyMatrix& a, const std::filesystem::path& path);

}  // namespace ccinv
