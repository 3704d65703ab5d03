#pragma once

#include <complex>
#include <concepts>
#include <cstdint>
#include <type_traits>

namespace ccinv {

using index_t = std::int64_t;
using cdouble = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Scalars the sparse kernels are instantiated for.
template <typename T>
concept Scalar = std::same_as<T, double> || std::same_as<T, cdouble>;

template <Scalar T>
constexpr T conj_value(const T& v) {
  if constexpr (is_complex_v<T>) {
    return std::conj(v);
  } else {
    return v;
  }
}

template <Scalar T>
constexpr double real_part(const T& v) {
  if constexpr (is_complex_v<T>) {
    return v.real();
  } else {
    return v;
  }
}

template <Scalar T>
constexpr double imag_part(const T& v) {
  if constexpr (is_complex_v<T>) {
    return v.imag();
  } else {
    (void)v;
    return 0.0;
  }
}

template <Scalar T>
inline bool is_finite_value(const T& v) {
  if constexpr (is_complex_v<T>) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  } else {
    return std::isfinite(v);
  }
}

}  // namespace ccinv
