// SPDX-License-Identifier: MIT
//
// Complex coordinate spaces ℂⁿ and ℂⁿ₁ with their Hermitian products.
// In ℂⁿ₁ the first complex coordinate carries the negative sign.
#pragma once

#include <complex>
#include <string>
#include <vector>

#include "slag/error.hpp"

namespace slag {

using cplx = std::complex<double>;

struct AmbientSpace {
  int epsilon = 0;          // -1, 0, +1
  int complex_dim = 4;
  int signature_index = 0;  // 1 only for the H^{2n+1} ⊂ ℂⁿ⁺¹₁ lift target

  static AmbientSpace flat(int n) { return {0, n, 0}; }
  static AmbientSpace sphere(int n) { return {1, n, 0}; }
  static AmbientSpace hyperbolic(int n) { return {-1, n, 1}; }

  void validate() const {
    if (complex_dim <= 0) throw Error(ErrorCode::Configuration, "complex_dim must be positive");
    if (epsilon < -1 || epsilon > 1) throw Error(ErrorCode::Configuration, "epsilon must be -1, 0 or 1");
    if ((signature_index == 1) != (epsilon == -1))
      throw Error(ErrorCode::Configuration, "signature_index 1 pairs with epsilon -1 only");
  }
};

struct CVector {
  std::vector<cplx> z;
  int signature_index = 0;

  std::size_t size() const { return z.size(); }
  cplx& operator[](std::size_t i) { return z[i]; }
  const cplx& operator[](std::size_t i) const { return z[i]; }
};

/// Σ z_j w̄_j, first term negated in signature 1. The real part is the
/// (pseudo-)Riemannian product; Re(z, i w) = ω(z, w) with ω(X,Y) = g(X,JY).
inline cplx hermitian_product(const CVector& z, const CVector& w) {
  if (z.size() != w.size() || z.signature_index != w.signature_index)
    throw Error(ErrorCode::DimensionMismatch,
                "vectors of length " + std::to_string(z.size()) + " and " + std::to_string(w.size()));
  cplx s{0.0, 0.0};
  for (std::size_t j = 0; j < z.size(); ++j) {
    const cplx t = z[j] * std::conj(w[j]);
    s += (j == 0 && z.signature_index == 1) ? -t : t;
  }
  return s;
}

inline double real_product(const CVector& z, const CVector& w) { return hermitian_product(z, w).real(); }

/// Componentwise multiplication by i.
inline CVector apply_J(CVector v) {
  for (auto& c : v.z) c = cplx(-c.imag(), c.real());
  return v;
}

inline CVector operator+(CVector a, const CVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline CVector operator-(CVector a, const CVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
inline CVector operator*(double s, CVector a) {
  for (auto& c : a.z) c *= s;
  return a;
}
inline CVector operator*(cplx s, CVector a) {
  for (auto& c : a.z) c *= s;
  return a;
}

inline double euclidean_norm(const CVector& a) {
  double s = 0.0;
  for (const auto& c : a.z) s += std::norm(c);
  return std::sqrt(s);
}

}  // namespace slag
