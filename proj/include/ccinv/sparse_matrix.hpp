#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ccinv/types.hpp"

namespace ccinv {

template <Scalar T>
struct Triplet {
  index_t row = 0;
  index_t col = 0;
  T value{};

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Range over row i of A^dagger, i.e. (j, conj(a_ji)) for every stored a_ji in column i.
template <Scalar T>
class AdjointRow {
 public:
  class iterator {
   public:
    using value_type = std::pair<index_t, T>;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const index_t* rows, const T* vals) : rows_(rows), vals_(vals) {}

    value_type operator*() const { return {*rows_, conj_value(*vals_)}; }
    iterator& operator++() {
      ++rows_;
      ++vals_;
      return *this;
    }
    iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    bool operator==(const iterator& other) const { return rows_ == other.rows_; }

   private:
    const index_t* rows_ = nullptr;
    const T* vals_ = nullptr;
  };

  AdjointRow(std::span<const index_t> rows, std::span<const T> vals) : rows_(rows), vals_(vals) {}

  iterator begin() const { return {rows_.data(), vals_.data()}; }
  iterator end() const { return {rows_.data() + rows_.size(), vals_.data() + vals_.size()}; }
  std::size_t size() const { return rows_.size(); }

 private:
  std::span<const index_t> rows_;
  std::span<const T> vals_;
};

/// Square sparse matrix with a compressed row index and a companion compressed column
/// index over the same entries. Immutable once built.
///
/// Duplicate triplets are summed at build time and explicit zeros are kept, so a
/// generator's structural nonzero count survives assembly. The diagonal is mirrored into
/// a dense array; diagonal positions with no stored entry read as 0 and are listed by
/// missing_diagonal().
template <Scalar T>
class SparseMatrix {
 public:
  using value_type = T;

  SparseMatrix() = default;

  /// Throws InvalidArgument for n < 1 or an index outside [0, n).
  static SparseMatrix build(index_t n, std::span<const Triplet<T>> triplets);
  static SparseMatrix build(index_t n, const std::vector<Triplet<T>>& triplets) {
    return build(n, std::span<const Triplet<T>>(triplets));
  }
  static SparseMatrix identity(index_t n);

  index_t order() const noexcept { return n_; }
  index_t nnz() const noexcept { return static_cast<index_t>(values_.size()); }

  std::span<const index_t> row_columns(index_t i) const {
    return {col_idx_.data() + row_ptr_[i], col_idx_.data() + row_ptr_[i + 1]};
  }
  std::span<const T> row_values(index_t i) const {
    return {values_.data() + row_ptr_[i], values_.data() + row_ptr_[i + 1]};
  }
  /// Rows j of the stored entries a_ji in column i, ascending.
  std::span<const index_t> column_rows(index_t i) const {
    return {row_idx_.data() + col_ptr_[i], row_idx_.data() + col_ptr_[i + 1]};
  }
  std::span<const T> column_values(index_t i) const {
    return {csc_values_.data() + col_ptr_[i], csc_values_.data() + col_ptr_[i + 1]};
  }

  AdjointRow<T> adjoint_row(index_t i) const;

  const std::vector<T>& diagonal() const noexcept { return diag_; }
  const std::vector<index_t>& missing_diagonal() const noexcept { return missing_diag_; }

  /// Entry (i, j), or zero when not stored. Binary search over row i.
  T at(index_t i, index_t j) const;

  /// Stored entries in row-major order.
  std::vector<Triplet<T>> triplets() const;

  SparseMatrix adjoint() const;
  SparseMatrix strict_lower() const;
  SparseMatrix strict_upper() const;
  SparseMatrix diagonal_part() const;

  /// Exact test: a_ij == conj(a_ji) for all stored entries, with missing entries as zero.
  bool is_hermitian() const;

  /// FNV-1a hash of order and entries; used to tag reports with the matrix they target.
  std::uint64_t fingerprint() const;

  const std::vector<index_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<index_t>& col_idx() const noexcept { return col_idx_; }
  const std::vector<T>& values() const noexcept { return values_; }

 private:
  SparseMatrix filtered(bool keep_lower, bool keep_diag, bool keep_upper) const;

  index_t n_ = 0;
  std::vector<index_t> row_ptr_;
  std::vector<index_t> col_idx_;
  std::vector<T> values_;
  std::vector<index_t> col_ptr_;
  std::vector<index_t> row_idx_;
  std::vector<T> csc_values_;
  std::vector<T> diag_;
  std::vector<index_t> missing_diag_;
};

using RealMatrix = SparseMatrix<double>;
using ComplexMatrix = SparseMatrix<cdouble>;

/// A matrix whose scalar tag is decided at run time (file input, CLI).
using AnyMatrix = std::variant<RealMatrix, ComplexMatrix>;

template <Scalar T>
std::vector<T> matvec(const SparseMatrix<T>& a, std::span<const T> x);

/// y = A^dagger x through the column index.
template <Scalar T>
std::vector<T> adjoint_matvec(const SparseMatrix<T>& a, std::span<const T> x);

ComplexMatrix to_complex(const RealMatrix& a);

index_t order_of(const AnyMatrix& a);
index_t nnz_of(const AnyMatrix& a);
std::uint64_t fingerprint_of(const AnyMatrix& a);
bool is_complex_matrix(const AnyMatrix& a);

extern template class SparseMatrix<double>;
extern template class SparseMatrix<cdouble>;

}  // namespace ccinv
