// SPDX-License-Identifier: MIT
//
// Complex numbers over an arbitrary real scalar (double or nested Dual).
// std::complex<T> is unspecified for non-floating T, hence this type.
#pragma once

#include <complex>

#include "slag/dual.hpp"

namespace slag {

template <typename T>
struct Cx {
  T re{};
  T im{};

  constexpr Cx() = default;
  constexpr Cx(const T& r) : re(r), im(0.0) {}  // NOLINT
  constexpr Cx(const T& r, const T& i) : re(r), im(i) {}
  constexpr Cx(double r) requires(!std::is_same_v<T, double>) : re(r), im(0.0) {}  // NOLINT
  constexpr Cx(std::complex<double> z) requires(!std::is_same_v<T, double>)  // NOLINT
      : re(z.real()), im(z.imag()) {}
  constexpr Cx(std::complex<double> z) requires(std::is_same_v<T, double>)  // NOLINT
      : re(z.real()), im(z.imag()) {}
};

template <typename T>
constexpr Cx<T> operator+(const Cx<T>& a, const Cx<T>& b) { return {a.re + b.re, a.im + b.im}; }
template <typename T>
constexpr Cx<T> operator-(const Cx<T>& a, const Cx<T>& b) { return {a.re - b.re, a.im - b.im}; }
template <typename T>
constexpr Cx<T> operator-(const Cx<T>& a) { return {-a.re, -a.im}; }
template <typename T>
constexpr Cx<T> operator*(const Cx<T>& a, const Cx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <typename T>
constexpr Cx<T> operator/(const Cx<T>& a, const Cx<T>& b) {
  const T den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
template <typename T>
constexpr Cx<T> operator*(const Cx<T>& a, const T& s) { return {a.re * s, a.im * s}; }
template <typename T>
constexpr Cx<T> operator*(const T& s, const Cx<T>& a) { return {a.re * s, a.im * s}; }
template <typename T>
constexpr Cx<T> operator*(const Cx<T>& a, double s) requires(!std::is_same_v<T, double>) {
  return {a.re * s, a.im * s};
}
template <typename T>
constexpr Cx<T> operator*(double s, const Cx<T>& a) requires(!std::is_same_v<T, double>) {
  return {a.re * s, a.im * s};
}
template <typename T>
constexpr Cx<T> operator/(const Cx<T>& a, const T& s) { return {a.re / s, a.im / s}; }
template <typename T>
constexpr Cx<T> operator/(const Cx<T>& a, double s) requires(!std::is_same_v<T, double>) {
  return {a.re / s, a.im / s};
}

template <typename T>
constexpr Cx<T> conj(const Cx<T>& a) { return {a.re, -a.im}; }
template <typename T>
constexpr T norm2(const Cx<T>& a) { return a.re * a.re + a.im * a.im; }
template <typename T>
constexpr Cx<T> times_i(const Cx<T>& a) { return {-a.im, a.re}; }

/// e^{iθ}
template <typename T>
Cx<T> expi(const T& theta) { return {cos(theta), sin(theta)}; }
template <typename T>
Cx<T> exp(const Cx<T>& z) {
  const T m = exp(z.re);
  return {m * cos(z.im), m * sin(z.im)};
}
template <typename T>
Cx<T> sin(const Cx<T>& z) { return {sin(z.re) * cosh(z.im), cos(z.re) * sinh(z.im)}; }
template <typename T>
Cx<T> cos(const Cx<T>& z) { return {cos(z.re) * cosh(z.im), -(sin(z.re) * sinh(z.im))}; }
template <typename T>
Cx<T> cosh(const Cx<T>& z) { return {cosh(z.re) * cos(z.im), sinh(z.re) * sin(z.im)}; }
template <typename T>
Cx<T> sinh(const Cx<T>& z) { return {sinh(z.re) * cos(z.im), cosh(z.re) * sin(z.im)}; }

/// Principal branch of z^p (cut along the negative real axis).
template <typename T>
Cx<T> cpow(const Cx<T>& z, double p) {
  const T lr = 0.5 * log(norm2(z));
  const T arg = atan2(z.im, z.re);
  return exp(Cx<T>{lr * p, arg * p});
}

template <typename T>
std::complex<double> to_std(const Cx<T>& z) { return {primal(z.re), primal(z.im)}; }

}  // namespace slag
