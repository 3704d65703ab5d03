#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ccinv/sparse_matrix.hpp"

namespace ccinv {

/// The weighting matrix Q of tr(Q C^-1).
class TraceQuery {
 public:
  enum class Kind { identity, diagonal_indicator, general };

  static TraceQuery identity();
  /// Q = diag(1 on indices, 0 elsewhere). Indices are sorted and deduplicated.
  static TraceQuery diagonal_indicator(std::vector<index_t> indices);
  static TraceQuery general(AnyMatrix q);

  Kind kind() const noexcept { return kind_; }
  const std::vector<index_t>& indices() const noexcept { return indices_; }
  const AnyMatrix& matrix() const { return *matrix_; }

  /// Throws InvalidArgument when the query does not fit a matrix of the given order.
  void validate(index_t order) const;

  /// Short stable label, e.g. "identity", "diag[3]", "general[n=10,nnz=12]".
  std::string describe() const;

  /// left^dagger Q right. A complex Q with real vectors is rejected.
  template <Scalar T>
  T form(std::span<const T> left, std::span<const T> right) const;

 private:
  Kind kind_ = Kind::identity;
  std::vector<index_t> indices_;
  std::shared_ptr<const AnyMatrix> matrix_;
};

extern template double TraceQuery::form(std::span<const double>, std::span<const double>) const;
extern template cdouble TraceQuery::form(std::span<const cdouble>, std::span<const cdouble>) const;

}  // namespace ccinv
