#include "ccinv/iter_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccinv/errors.hpp"
#include "ccinv/noise.hpp"

namespace ccinv {

namespace {

template <Scalar T>
void require_nonzero_diagonal(const SparseMatrix<T>& c) {
  const auto& d = c.diagonal();
  for (index_t i = 0; i < c.order(); ++i) {
    if (d[i] == T{}) {
      throw ZeroDiagonalError(i);
    }
  }
}

template <Scalar T>
void require_length(const SparseMatrix<T>& c, std::size_t len, const char* what) {
  if (static_cast<index_t>(len) != c.order()) {
    throw InvalidArgument(std::string(what) + ": vector length " + std::to_string(len) +
                          " does not match order " + std::to_string(c.order()));
  }
}

template <Scalar T>
double max_norm(std::span<const T> v) {
  double m = 0.0;
  for (const auto& x : v) {
    m = std::max(m, std::abs(x));
  }
  return m;
}

template <Scalar T>
double norm2(std::span<const T> v) {
  double s = 0.0;
  for (const auto& x : v) {
    s += std::norm(x);
  }
  return std::sqrt(s);
}

template <Scalar T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += conj_value(a[i]) * b[i];
  }
  return s;
}

template <Scalar T>
double residual_max(const SparseMatrix<T>& c, std::span<const T> b, std::span<const T> x) {
  auto cx = matvec(c, x);
  double m = 0.0;
  for (std::size_t i = 0; i < cx.size(); ++i) {
    m = std::max(m, std::abs(b[i] - cx[i]));
  }
  return m;
}

}  // namespace

template <Scalar T>
void gauss_seidel_sweep(const SparseMatrix<T>& c, std::span<const T> b, std::span<T> x) {
  const auto& d = c.diagonal();
  const auto& rp = c.row_ptr();
  const auto& ci = c.col_idx();
  const auto& v = c.values();
  for (index_t i = 0; i < c.order(); ++i) {
    if (d[i] == T{}) {
      throw ZeroDiagonalError(i);
    }
    T sum{};
    for (index_t k = rp[i]; k < rp[i + 1]; ++k) {
      if (ci[k] != i) {
        sum += v[k] * x[ci[k]];
      }
    }
    x[i] = (b[i] - sum) / d[i];
  }
}

template <Scalar T>
void gauss_seidel_adjoint_sweep(const SparseMatrix<T>& c, std::span<const T> b, std::span<T> x) {
  const auto& d = c.diagonal();
  for (index_t i = 0; i < c.order(); ++i) {
    if (d[i] == T{}) {
      throw ZeroDiagonalError(i);
    }
    auto rows = c.column_rows(i);
    auto vals = c.column_values(i);
    T sum{};
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k] != i) {
        sum += conj_value(vals[k]) * x[rows[k]];
      }
    }
    x[i] = (b[i] - sum) / conj_value(d[i]);
  }
}

template <Scalar T>
SolveReport<T> gauss_seidel(const SparseMatrix<T>& c, std::span<const T> b, std::span<const T> x0,
                            double tol, int max_iter) {
  require_length(c, b.size(), "gauss_seidel");
  require_length(c, x0.size(), "gauss_seidel");
  require_nonzero_diagonal(c);
  if (!(tol > 0.0)) {
    throw InvalidArgument("gauss_seidel: tolerance must be positive");
  }

  SolveReport<T> rep;
  rep.x.assign(x0.begin(), x0.end());
  std::vector<T> prev(rep.x.size());
  for (int it = 1; it <= max_iter; ++it) {
    prev = rep.x;
    gauss_seidel_sweep<T>(c, b, rep.x);
    double change = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
      change = std::max(change, std::abs(rep.x[i] - prev[i]));
    }
    rep.iterations = it;
    rep.change_norm = change;
    const double scale = std::max(1.0, max_norm<T>(rep.x));
    rep.stop_norm = change / scale;
    if (!std::isfinite(change)) {
      break;
    }
    if (rep.stop_norm <= tol) {
      rep.converged = true;
      break;
    }
  }
  rep.residual_norm = residual_max<T>(c, b, rep.x);
  return rep;
}

template <Scalar T>
SolveReport<T> bicg(const SparseMatrix<T>& c, std::span<const T> b, std::span<const T> x0,
                    double tol, int max_iter) {
  require_length(c, b.size(), "bicg");
  require_length(c, x0.size(), "bicg");
  if (!(tol > 0.0)) {
    throw InvalidArgument("bicg: tolerance must be positive");
  }

  const std::size_t n = b.size();
  SolveReport<T> rep;
  rep.x.assign(x0.begin(), x0.end());

  std::vector<T> r(n);
  {
    auto cx = matvec<T>(c, rep.x);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = b[i] - cx[i];
    }
  }
  const double b_scale = std::max(max_norm<T>(b), std::numeric_limits<double>::min());
  rep.residual_norm = max_norm<T>(r);
  if (rep.residual_norm / b_scale <= tol) {
    rep.stop_norm = rep.residual_norm / b_scale;
    rep.converged = true;
    return rep;
  }

  std::vector<T> rt = r;
  std::vector<T> p = r;
  std::vector<T> pt = rt;
  T rho = dot<T>(rt, r);
  const double tiny = std::numeric_limits<double>::epsilon() * std::numeric_limits<double>::epsilon();

  for (int it = 1; it <= max_iter; ++it) {
    if (std::abs(rho) <= tiny * norm2<T>(rt) * norm2<T>(r)) {
      throw BreakdownError("bicg breakdown: <r~, r> vanished at iteration " + std::to_string(it));
    }
    auto q = matvec<T>(c, p);
    auto qt = adjoint_matvec<T>(c, pt);
    const T ptq = dot<T>(pt, q);
    if (std::abs(ptq) <= tiny * norm2<T>(pt) * norm2<T>(q)) {
      throw BreakdownError("bicg breakdown: <p~, Cp> vanished at iteration " + std::to_string(it));
    }
    const T alpha = rho / ptq;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const T step = alpha * p[i];
      rep.x[i] += step;
      change = std::max(change, std::abs(step));
      r[i] -= alpha * q[i];
      rt[i] -= conj_value(alpha) * qt[i];
    }
    rep.iterations = it;
    rep.change_norm = change;
    rep.residual_norm = max_norm<T>(r);
    const double change_rel = change / std::max(1.0, max_norm<T>(rep.x));
    const double resid_rel = rep.residual_norm / b_scale;
    rep.stop_norm = std::min(change_rel, resid_rel);
    if (!std::isfinite(rep.residual_norm)) {
      break;
    }
    if (rep.stop_norm <= tol) {
      rep.converged = true;
      break;
    }
    const T rho_next = dot<T>(rt, r);
    const T beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = r[i] + beta * p[i];
      pt[i] = rt[i] + conj_value(beta) * pt[i];
    }
  }
  return rep;
}

template <Scalar T>
DenseMatrix<T> to_dense(const SparseMatrix<T>& c) {
  if (c.order() > kDenseOracleCap) {
    throw InvalidArgument("dense oracle limited to order " + std::to_string(kDenseOracleCap) +
                          ", got " + std::to_string(c.order()));
  }
  DenseMatrix<T> a = DenseMatrix<T>::Zero(c.order(), c.order());
  for (index_t i = 0; i < c.order(); ++i) {
    auto cols = c.row_columns(i);
    auto vals = c.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      a(i, cols[k]) = vals[k];
    }
  }
  return a;
}

template <Scalar T>
DenseMatrix<T> dense_lu_inverse(const SparseMatrix<T>& c) {
  const DenseMatrix<T> a = to_dense(c);
  Eigen::PartialPivLU<DenseMatrix<T>> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 64.0 * std::numeric_limits<double>::epsilon())) {
    throw SingularMatrixError("matrix is singular to working precision (rcond " +
                              std::to_string(rcond) + ")");
  }
  return lu.inverse();
}

template <Scalar T>
T dense_trace(const TraceQuery& q, const DenseMatrix<T>& inverse) {
  q.validate(inverse.rows());
  switch (q.kind()) {
    case TraceQuery::Kind::identity:
      return inverse.trace();
    case TraceQuery::Kind::diagonal_indicator: {
      T sum{};
      for (index_t i : q.indices()) {
        sum += inverse(i, i);
      }
      return sum;
    }
    case TraceQuery::Kind::general: {
      T sum{};
      auto accumulate = [&](const auto& qm) {
        for (index_t i = 0; i < qm.order(); ++i) {
          auto cols = qm.row_columns(i);
          auto vals = qm.row_values(i);
          for (std::size_t k = 0; k < cols.size(); ++k) {
            if constexpr (is_complex_v<typename std::decay_t<decltype(qm)>::value_type> &&
                          !is_complex_v<T>) {
              throw InvalidArgument("complex trace query requires a complex matrix");
            } else {
              sum += static_cast<T>(vals[k]) * inverse(cols[k], i);
            }
          }
        }
      };
      std::visit(accumulate, q.matrix());
      return sum;
    }
  }
  return T{};
}

template <Scalar T>
SpectralEstimate spectral_radius_estimate(const SparseMatrix<T>& c, IterationOperator op,
                                          double tol, int max_iter) {
  require_nonzero_diagonal(c);
  const auto n = static_cast<std::size_t>(c.order());
  const std::vector<T> zero(n, T{});

  // Fixed pseudo-random start so the estimate is reproducible and generic.
  std::vector<T> x(n);
  {
    SplitMix64 gen(0x5EEDULL);
    for (auto& v : x) {
      v = T(0.5 + static_cast<double>(gen() >> 11) * 0x1.0p-53);
    }
    const double s = norm2<T>(x);
    for (auto& v : x) {
      v /= s;
    }
  }

  SpectralEstimate est;
  std::vector<double> log_growth;
  log_growth.reserve(static_cast<std::size_t>(std::max(max_iter, 0)));
  double prev_ratio = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    // A homogeneous sweep maps x to -T x (or -S^dagger x); the sign does not affect sp.
    if (op == IterationOperator::lower_sweep) {
      gauss_seidel_sweep<T>(c, zero, x);
    } else {
      gauss_seidel_adjoint_sweep<T>(c, zero, x);
    }
    const double ratio = norm2<T>(x);
    est.iterations = it;
    if (ratio == 0.0) {
      est.radius = 0.0;
      est.converged = true;
      return est;
    }
    if (!std::isfinite(ratio)) {
      est.radius = std::numeric_limits<double>::infinity();
      return est;
    }
    for (auto& v : x) {
      v /= ratio;
    }
    log_growth.push_back(std::log(ratio));
    if (prev_ratio > 0.0 && std::abs(ratio - prev_ratio) <= tol * ratio) {
      est.radius = ratio;
      est.converged = true;
      return est;
    }
    prev_ratio = ratio;
  }
  const std::size_t half = log_growth.size() / 2;
  double acc = 0.0;
  for (std::size_t k = half; k < log_growth.size(); ++k) {
    acc += log_growth[k];
  }
  const auto count = static_cast<double>(log_growth.size() - half);
  est.radius = count > 0 ? std::exp(acc / count) : 0.0;
  est.converged = false;
  return est;
}

#define CCINV_INSTANTIATE(T)                                                                    \
  template void gauss_seidel_sweep<T>(const SparseMatrix<T>&, std::span<const T>, std::span<T>); \
  template void gauss_seidel_adjoint_sweep<T>(const SparseMatrix<T>&, std::span<const T>,       \
                                              std::span<T>);                                    \
  template SolveReport<T> gauss_seidel<T>(const SparseMatrix<T>&, std::span<const T>,           \
                                          std::span<const T>, double, int);                     \
  template SolveReport<T> bicg<T>(const SparseMatrix<T>&, std::span<const T>,                   \
                                  std::span<const T>, double, int);                             \
  template DenseMatrix<T> to_dense<T>(const SparseMatrix<T>&);                                  \
  template DenseMatrix<T> dense_lu_inverse<T>(const SparseMatrix<T>&);                          \
  template T dense_trace<T>(const TraceQuery&, const DenseMatrix<T>&);                          \
  template SpectralEstimate spectral_radius_estimate<T>(const SparseMatrix<T>&,                 \
                                                        IterationOperator, double, int);

CCINV_INSTANTIATE(double)
CCINV_INSTANTIATE(cdouble)

#undef CCINV_INSTANTIATE

}  // namespace ccinv
