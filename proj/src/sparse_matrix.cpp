#include "ccinv/sparse_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "ccinv/errors.hpp"

namespace ccinv {

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::build(index_t n, std::span<const Triplet<T>> triplets) {
  if (n < 1) {
    throw InvalidArgument("matrix order must be positive, got " + std::to_string(n));
  }
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
      throw InvalidArgument("entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                            ") outside a matrix of order " + std::to_string(n));
    }
  }

  std::vector<Triplet<T>> sorted(triplets.begin(), triplets.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  m.col_idx_.reserve(sorted.size());
  m.values_.reserve(sorted.size());
  for (std::size_t k = 0; k < sorted.size();) {
    const index_t r = sorted[k].row;
    const index_t c = sorted[k].col;
    T sum = sorted[k].value;
    std::size_t next = k + 1;
    while (next < sorted.size() && sorted[next].row == r && sorted[next].col == c) {
      sum += sorted[next].value;
      ++next;
    }
    m.col_idx_.push_back(c);
    m.values_.push_back(sum);
    ++m.row_ptr_[r + 1];
    k = next;
  }
  for (index_t i = 0; i < n; ++i) {
    m.row_ptr_[i + 1] += m.row_ptr_[i];
  }

  // Column index by counting sort; rows stay ascending inside each column.
  const auto nz = m.values_.size();
  m.col_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (index_t c : m.col_idx_) {
    ++m.col_ptr_[c + 1];
  }
  for (index_t i = 0; i < n; ++i) {
    m.col_ptr_[i + 1] += m.col_ptr_[i];
  }
  m.row_idx_.resize(nz);
  m.csc_values_.resize(nz);
  std::vector<index_t> fill(m.col_ptr_.begin(), m.col_ptr_.end() - 1);
  for (index_t r = 0; r < n; ++r) {
    for (index_t k = m.row_ptr_[r]; k < m.row_ptr_[r + 1]; ++k) {
      const index_t dst = fill[m.col_idx_[k]]++;
      m.row_idx_[dst] = r;
      m.csc_values_[dst] = m.values_[k];
    }
  }

  m.diag_.assign(static_cast<std::size_t>(n), T{});
  for (index_t r = 0; r < n; ++r) {
    auto cols = m.row_columns(r);
    auto it = std::lower_bound(cols.begin(), cols.end(), r);
    if (it != cols.end() && *it == r) {
      m.diag_[r] = m.row_values(r)[static_cast<std::size_t>(it - cols.begin())];
    } else {
      m.missing_diag_.push_back(r);
    }
  }
  return m;
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::identity(index_t n) {
  std::vector<Triplet<T>> t;
  t.reserve(static_cast<std::size_t>(std::max<index_t>(n, 0)));
  for (index_t i = 0; i < n; ++i) {
    t.push_back({i, i, T{1.0}});
  }
  return build(n, t);
}

template <Scalar T>
AdjointRow<T> SparseMatrix<T>::adjoint_row(index_t i) const {
  if (i < 0 || i >= n_) {
    throw InvalidArgument("adjoint_row index " + std::to_string(i) + " out of range");
  }
  return AdjointRow<T>(column_rows(i), column_values(i));
}

template <Scalar T>
T SparseMatrix<T>::at(index_t i, index_t j) const {
  auto cols = row_columns(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) {
    return T{};
  }
  return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
}

template <Scalar T>
std::vector<Triplet<T>> SparseMatrix<T>::triplets() const {
  std::vector<Triplet<T>> out;
  out.reserve(values_.size());
  for (index_t r = 0; r < n_; ++r) {
    for (index_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      out.push_back({r, col_idx_[k], values_[k]});
    }
  }
  return out;
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::adjoint() const {
  std::vector<Triplet<T>> t;
  t.reserve(values_.size());
  for (index_t r = 0; r < n_; ++r) {
    for (index_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      t.push_back({col_idx_[k], r, conj_value(values_[k])});
    }
  }
  return build(n_, t);
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::filtered(bool keep_lower, bool keep_diag, bool keep_upper) const {
  std::vector<Triplet<T>> t;
  for (index_t r = 0; r < n_; ++r) {
    for (index_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const index_t c = col_idx_[k];
      if ((c < r && keep_lower) || (c == r && keep_diag) || (c > r && keep_upper)) {
        t.push_back({r, c, values_[k]});
      }
    }
  }
  return build(n_, t);
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::strict_lower() const {
  return filtered(true, false, false);
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::strict_upper() const {
  return filtered(false, false, true);
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::diagonal_part() const {
  return filtered(false, true, false);
}

template <Scalar T>
bool SparseMatrix<T>::is_hermitian() const {
  for (index_t r = 0; r < n_; ++r) {
    for (index_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (values_[k] != conj_value(at(col_idx_[k], r))) {
        return false;
      }
    }
  }
  return true;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

template <typename V>
void fnv_mix(std::uint64_t& h, const V& v) {
  unsigned char bytes[sizeof(V)];
  std::memcpy(bytes, &v, sizeof(V));
  for (unsigned char b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
}

}  // namespace

template <Scalar T>
std::uint64_t SparseMatrix<T>::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, n_);
  for (index_t r = 0; r < n_; ++r) {
    for (index_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      fnv_mix(h, r);
      fnv_mix(h, col_idx_[k]);
      fnv_mix(h, real_part(values_[k]));
      fnv_mix(h, imag_part(values_[k]));
    }
  }
  return h;
}

template <Scalar T>
std::vector<T> matvec(const SparseMatrix<T>& a, std::span<const T> x) {
  if (static_cast<index_t>(x.size()) != a.order()) {
    throw InvalidArgument("matvec: vector length " + std::to_string(x.size()) +
                          " does not match order " + std::to_string(a.order()));
  }
  std::vector<T> y(x.size(), T{});
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& v = a.values();
  for (index_t i = 0; i < a.order(); ++i) {
    T sum{};
    for (index_t k = rp[i]; k < rp[i + 1]; ++k) {
      sum += v[k] * x[ci[k]];
    }
    y[i] = sum;
  }
  return y;
}

template <Scalar T>
std::vector<T> adjoint_matvec(const SparseMatrix<T>& a, std::span<const T> x) {
  if (static_cast<index_t>(x.size()) != a.order()) {
    throw InvalidArgument("adjoint_matvec: vector length " + std::to_string(x.size()) +
                          " does not match order " + std::to_string(a.order()));
  }
  std::vector<T> y(x.size(), T{});
  for (index_t i = 0; i < a.order(); ++i) {
    auto rows = a.column_rows(i);
    auto vals = a.column_values(i);
    T sum{};
    for (std::size_t k = 0; k < rows.size(); ++k) {
      sum += conj_value(vals[k]) * x[rows[k]];
    }
    y[i] = sum;
  }
  return y;
}

ComplexMatrix to_complex(const RealMatrix& a) {
  std::vector<Triplet<cdouble>> t;
  t.reserve(static_cast<std::size_t>(a.nnz()));
  for (const auto& e : a.triplets()) {
    t.push_back({e.row, e.col, cdouble(e.value, 0.0)});
  }
  return ComplexMatrix::build(a.order(), t);
}

index_t order_of(const AnyMatrix& a) {
  return std::visit([](const auto& m) { return m.order(); }, a);
}

index_t nnz_of(const AnyMatrix& a) {
  return std::visit([](const auto& m) { return m.nnz(); }, a);
}

std::uint64_t fingerprint_of(const AnyMatrix& a) {
  return std::visit([](const auto& m) { return m.fingerprint(); }, a);
}

bool is_complex_matrix(const AnyMatrix& a) { return std::holds_alternative<ComplexMatrix>(a); }

template class SparseMatrix<double>;
template class SparseMatrix<cdouble>;

template std::vector<double> matvec(const SparseMatrix<double>&, std::span<const double>);
template std::vector<cdouble> matvec(const SparseMatrix<cdouble>&, std::span<const cdouble>);
template std::vector<double> adjoint_matvec(const SparseMatrix<double>&, std::span<const double>);
template std::vector<cdouble> adjoint_matvec(const SparseMatrix<cdouble>&,
                                             std::span<const cdouble>);

}  // namespace ccinv
