// SPDX-License-Identifier: MIT
//
// Forward-mode dual numbers with an N-vector of infinitesimal parts.
// Nesting Dual<Dual<double, N>, N> yields value, gradient and Hessian
// in a single pass with no truncation error.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

namespace slag {

template <typename T, std::size_t N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double x) : v(x) {}  // NOLINT: implicit promotion from constants
  constexpr Dual(const T& x, const std::array<T, N>& g) : v(x), d(g) {}
  constexpr Dual(const T& x) requires(!std::is_same_v<T, double>) : v(x) {}

  constexpr Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  constexpr Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  constexpr Dual& operator/=(const Dual& o) {
    const T inv = T(1.0) / o.v;
    const T q = v * inv;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    v = q;
    return *this;
  }
};

template <typename X>
struct is_dual : std::false_type {};
template <typename T, std::size_t N>
struct is_dual<Dual<T, N>> : std::true_type {};

// Scalar is the innermost floating type.
template <typename X>
struct scalar_of {
  using type = X;
};
template <typename T, std::size_t N>
struct scalar_of<Dual<T, N>> {
  using type = typename scalar_of<T>::type;
};

template <typename X>
constexpr double primal(const X& x) {
  if constexpr (is_dual<X>::value) {
    return primal(x.v);
  } else {
    return static_cast<double>(x);
  }
}

template <typename T, std::size_t N>
constexpr Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.v = -a.v;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}
template <typename T, std::size_t N>
constexpr Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) { return a += b; }
template <typename T, std::size_t N>
constexpr Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) { return a -= b; }
template <typename T, std::size_t N>
constexpr Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) { return a *= b; }
template <typename T, std::size_t N>
constexpr Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) { return a /= b; }

template <typename T, std::size_t N>
constexpr Dual<T, N> operator+(Dual<T, N> a, double b) { a.v += b; return a; }
template <typename T, std::size_t N>
constexpr Dual<T, N> operator+(double b, Dual<T, N> a) { a.v += b; return a; }
template <typename T, std::size_t N>
constexpr Dual<T, N> operator-(Dual<T, N> a, double b) { a.v -= b; return a; }
template <typename T, std::size_t N>
constexpr Dual<T, N> operator-(double b, const Dual<T, N>& a) { return Dual<T, N>(b) - a; }
template <typename T, std::size_t N>
constexpr Dual<T, N> operator*(Dual<T, N> a, double b) {
  a.v *= b;
  for (auto& x : a.d) x *= b;
  return a;
}
template <typename T, std::size_t N>
constexpr Dual<T, N> operator*(double b, Dual<T, N> a) { return a * b; }
template <typename T, std::size_t N>
constexpr Dual<T, N> operator/(Dual<T, N> a, double b) { return a * (1.0 / b); }
template <typename T, std::size_t N>
constexpr Dual<T, N> operator/(double b, const Dual<T, N>& a) { return Dual<T, N>(b) / a; }

template <typename T, std::size_t N>
constexpr bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) { return primal(a) < primal(b); }
template <typename T, std::size_t N>
constexpr bool operator<(const Dual<T, N>& a, double b) { return primal(a) < b; }
template <typename T, std::size_t N>
constexpr bool operator>(const Dual<T, N>& a, double b) { return primal(a) > b; }

namespace detail {
// f(a) with f'(a) supplied by the caller; chain rule through every level.
template <typename T, std::size_t N>
constexpr Dual<T, N> chain(const Dual<T, N>& a, const T& fv, const T& dfv) {
  Dual<T, N> r;
  r.v = fv;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = dfv * a.d[i];
  return r;
}
}  // namespace detail

using std::acos;
using std::asin;
using std::atan;
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::sin;
using std::sinh;
using std::sqrt;
using std::tan;
using std::tanh;
using std::cbrt;

template <typename T, std::size_t N>
Dual<T, N> sin(const Dual<T, N>& a) { return detail::chain(a, T(sin(a.v)), T(cos(a.v))); }
template <typename T, std::size_t N>
Dual<T, N> cos(const Dual<T, N>& a) { return detail::chain(a, T(cos(a.v)), T(-sin(a.v))); }
template <typename T, std::size_t N>
Dual<T, N> tan(const Dual<T, N>& a) {
  const T t = tan(a.v);
  return detail::chain(a, t, T(1.0 + t * t));
}
template <typename T, std::size_t N>
Dual<T, N> exp(const Dual<T, N>& a) {
  const T e = exp(a.v);
  return detail::chain(a, e, e);
}
template <typename T, std::size_t N>
Dual<T, N> log(const Dual<T, N>& a) { return detail::chain(a, T(log(a.v)), T(1.0 / a.v)); }
template <typename T, std::size_t N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  const T s = sqrt(a.v);
  return detail::chain(a, s, T(0.5 / s));
}
template <typename T, std::size_t N>
Dual<T, N> cbrt(const Dual<T, N>& a) {
  const T c = cbrt(a.v);
  return detail::chain(a, c, T(1.0 / (3.0 * c * c)));
}
template <typename T, std::size_t N>
Dual<T, N> sinh(const Dual<T, N>& a) { return detail::chain(a, T(sinh(a.v)), T(cosh(a.v))); }
template <typename T, std::size_t N>
Dual<T, N> cosh(const Dual<T, N>& a) { return detail::chain(a, T(cosh(a.v)), T(sinh(a.v))); }
template <typename T, std::size_t N>
Dual<T, N> tanh(const Dual<T, N>& a) {
  const T t = tanh(a.v);
  return detail::chain(a, t, T(1.0 - t * t));
}
template <typename T, std::size_t N>
Dual<T, N> asin(const Dual<T, N>& a) {
  return detail::chain(a, T(asin(a.v)), T(1.0 / sqrt(1.0 - a.v * a.v)));
}
template <typename T, std::size_t N>
Dual<T, N> atan(const Dual<T, N>& a) {
  return detail::chain(a, T(atan(a.v)), T(1.0 / (1.0 + a.v * a.v)));
}
template <typename T, std::size_t N>
Dual<T, N> pow(const Dual<T, N>& a, double p) {
  using std::pow;
  return detail::chain(a, T(pow(a.v, p)), T(p * pow(a.v, p - 1.0)));
}

using std::atan2;
template <typename T, std::size_t N>
Dual<T, N> atan2(const Dual<T, N>& y, const Dual<T, N>& x) {
  Dual<T, N> r;
  r.v = atan2(y.v, x.v);
  const T den = x.v * x.v + y.v * y.v;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) / den;
  return r;
}

/// Value, gradient and Hessian over four parameters.
using Hyper = Dual<Dual<double, 4>, 4>;

/// Seed parameter k at value x: first-order parts in both levels.
inline Hyper seed_hyper(double x, std::size_t k) {
  Hyper h;
  h.v.v = x;
  h.v.d[k] = 1.0;
  h.d[k].v = 1.0;
  return h;
}

/// Second-order Taylor node: value + g·δ + ½ δᵀHδ with δ = x − primal(x).
/// Lets quantities known only numerically (quadrature values) join an
/// exact jet computation without losing derivative information.
template <typename X, std::size_t M>
X taylor2(double value, const std::array<double, M>& grad,
          const std::array<std::array<double, M>, M>& hess, const std::array<X, M>& x) {
  std::array<X, M> delta;
  for (std::size_t k = 0; k < M; ++k) delta[k] = x[k] - primal(x[k]);
  X r = X(value);
  for (std::size_t k = 0; k < M; ++k) {
    r = r + grad[k] * delta[k];
    for (std::size_t l = 0; l < M; ++l) r = r + 0.5 * hess[k][l] * delta[k] * delta[l];
  }
  return r;
}

}  // namespace slag
