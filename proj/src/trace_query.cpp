#include "ccinv/trace_query.hpp"

#include <algorithm>

#include "ccinv/errors.hpp"

namespace ccinv {

TraceQuery TraceQuery::identity() { return TraceQuery{}; }

TraceQuery TraceQuery::diagonal_indicator(std::vector<index_t> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  TraceQuery q;
  q.kind_ = Kind::diagonal_indicator;
  q.indices_ = std::move(indices);
  return q;
}

TraceQuery TraceQuery::general(AnyMatrix m) {
  TraceQuery q;
  q.kind_ = Kind::general;
  q.matrix_ = std::make_shared<const AnyMatrix>(std::move(m));
  return q;
}

void TraceQuery::validate(index_t order) const {
  switch (kind_) {
    case Kind::identity:
      return;
    case Kind::diagonal_indicator:
      if (!indices_.empty() && (indices_.front() < 0 || indices_.back() >= order)) {
        throw InvalidArgument("trace query index outside [0, " + std::to_string(order) + ")");
      }
      return;
    case Kind::general:
      if (order_of(*matrix_) != order) {
        throw InvalidArgument("trace query matrix has order " +
                              std::to_string(order_of(*matrix_)) + ", expected " +
                              std::to_string(order));
      }
      return;
  }
}

std::string TraceQuery::describe() const {
  switch (kind_) {
    case Kind::identity:
      return "identity";
    case Kind::diagonal_indicator:
      return "diag[" + std::to_string(indices_.size()) + "]";
    case Kind::general:
      return "general[n=" + std::to_string(order_of(*matrix_)) +
             ",nnz=" + std::to_string(nnz_of(*matrix_)) + "]";
  }
  return "unknown";
}

namespace {

template <Scalar T, Scalar Q>
T general_form(const SparseMatrix<Q>& q, std::span<const T> left, std::span<const T> right) {
  T sum{};
  for (index_t i = 0; i < q.order(); ++i) {
    auto cols = q.row_columns(i);
    auto vals = q.row_values(i);
    T row{};
    for (std::size_t k = 0; k < cols.size(); ++k) {
      row += static_cast<T>(vals[k]) * right[cols[k]];
    }
    sum += conj_value(left[i]) * row;
  }
  return sum;
}

}  // namespace

template <Scalar T>
T TraceQuery::form(std::span<const T> left, std::span<const T> right) const {
  switch (kind_) {
    case Kind::identity: {
      T sum{};
      for (std::size_t i = 0; i < left.size(); ++i) {
        sum += conj_value(left[i]) * right[i];
      }
      return sum;
    }
    case Kind::diagonal_indicator: {
      T sum{};
      for (index_t i : indices_) {
        sum += conj_value(left[i]) * right[i];
      }
      return sum;
    }
    case Kind::general:
      if (const auto* rq = std::get_if<RealMatrix>(matrix_.get())) {
        return general_form<T>(*rq, left, right);
      }
      if constexpr (is_complex_v<T>) {
        return general_form<T>(std::get<ComplexMatrix>(*matrix_), left, right);
      } else {
        throw InvalidArgument("complex trace query requires a complex matrix");
      }
  }
  return T{};
}

template double TraceQuery::form(std::span<const double>, std::span<const double>) const;
template cdouble TraceQuery::form(std::span<const cdouble>, std::span<const cdouble>) const;

}  // namespace ccinv
