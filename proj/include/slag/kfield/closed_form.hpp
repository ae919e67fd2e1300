// SPDX-License-Identifier: MIT
//
// Closed-form frame coefficients and gauge quantities of the generic branch,
// as functions of (s, t) and of the k-fields at (u, v). The coordinate frame
// is X₄ = ∂t, X₃ = σ∂s/μ, X₁ + iX₂ = (∂u + i∂v)/ρ − σγ₁∂s − γ₂∂t.
#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "slag/complex.hpp"
#include "slag/dual.hpp"
#include "slag/error.hpp"
#include "slag/kfield/system.hpp"
#include "slag/structure/frame_data.hpp"

namespace slag {

/// k₁…k₄ and their u, v partials at one point.
template <typename T>
struct KPoint {
  std::array<T, 4> k{}, ku{}, kv{};
};

/// Second-order jet of the k-fields in (u, v).
struct KJet {
  std::array<double, 4> k{}, ku{}, kv{}, kuu{}, kuv{}, kvv{};

  static KJet constant(std::array<double, 4> values) {
    KJet j;
    j.k = values;
    return j;
  }
};

/// Everything the closed forms produce at one point.
template <typename T>
struct ClosedForm {
  T a1{}, a2{}, a3{}, a6{}, b1{}, b2{}, b6{}, r{};
  T mu{};
  Cx<T> rho, gamma1, gamma2;
  Cx<T> z, w;            // z for the regular systems, w for the z-singular ones
  T f_coord{}, g_coord{};  // conjugate coordinates to T and S
  T H{};                 // normalisation constant, recomputed from the fields
  double eps_tilde = 1.0;
  double s_orientation = 1.0;  // σ in S = σ∂s
};

namespace detail {

inline constexpr double kDenominatorFloor = 1e-6;

template <typename T>
void require_away(const T& den, const char* what) {
  if (!(std::abs(primal(den)) > kDenominatorFloor)) throw Error(ErrorCode::SingularPoint, what);
}

/// σ: orientation of S = μX₃ along ∂s, fixed by the X₃ Codazzi equation for each system.
inline double s_orientation(SystemId s) {
  return system_epsilon(s) == 0 ? -1.0 : 1.0;
}

// a₃(t) and μ(t) = 1/√|ε + a₃²|.
template <typename T>
void a3_and_mu(SystemId s, const T& t, T& a3, T& mu) {
  using std::cos, std::sinh, std::cosh, std::tan, std::tanh;
  switch (s) {
    case SystemId::constraa:
    case SystemId::constrab:
      if (!(primal(t) > kDenominatorFloor)) throw Error(ErrorCode::SingularPoint, "flat branch needs t > 0");
      a3 = -1.0 / t;
      mu = t;
      return;
    case SystemId::cpk1:
    case SystemId::cpk2:
      if (!(primal(cos(t)) > kDenominatorFloor)) throw Error(ErrorCode::SingularPoint, "projective branch needs cos t > 0");
      a3 = tan(t);
      mu = cos(t);
      return;
    case SystemId::kh:
      a3 = -tanh(t);
      mu = cosh(t);
      return;
    case SystemId::kh2:
    case SystemId::kh3:
      if (!(primal(t) > kDenominatorFloor)) throw Error(ErrorCode::SingularPoint, "a3^2 > 1 branch needs t > 0");
      a3 = -cosh(t) / sinh(t);
      mu = sinh(t);
      return;
  }
}

template <typename T>
ClosedForm<T> regular(SystemId sys, const KPoint<T>& kp_in, const T& s_in, const T& t) {
  using std::sin, std::cos, std::sinh, std::cosh, std::exp, std::sqrt, std::tan, std::tanh;
  ClosedForm<T> out;
  out.s_orientation = s_orientation(sys);
  a3_and_mu(sys, t, out.a3, out.mu);
  // The flat system is written with a₂ = −sin 2s/(tD): that is the ζ = +1 form
  // in (−s, −k₁), so it is evaluated there.
  const bool mirrored = sys == SystemId::constraa;
  const T s = mirrored ? T(-s_in) : s_in;
  KPoint<T> kp = kp_in;
  if (mirrored) {
    kp.k[0] = -kp.k[0];
    kp.ku[0] = -kp.ku[0];
    kp.kv[0] = -kp.kv[0];
  }
  const T& k1 = kp.k[0];
  const T& k2 = kp.k[1];
  const Cx<T> kk(kp.k[2], kp.k[3]);
  const T &k1u = kp.ku[0], &k1v = kp.kv[0];
  const T &k2u = kp.ku[1], &k2v = kp.kv[1];
  const T &k3 = kp.k[2], &k4 = kp.k[3];
  const T& mu = out.mu;
  const bool hyp = sys == SystemId::kh;  // trigonometric and hyperbolic roles of s, k₁ swap
  out.eps_tilde = hyp ? -1.0 : 1.0;

  // D = |c|²·2 with c = cos(s + ik₁) (or cosh(s + ik₁) for kh).
  const T D = hyp ? T(cosh(2.0 * s) + cos(2.0 * k1)) : T(cos(2.0 * s) + cosh(2.0 * k1));
  require_away(D, "closed form denominator vanishes");
  const Cx<T> sk(s, k1);
  const Cx<T> c = hyp ? cosh(sk) : cos(sk);
  // z = μ(a₂ + ib₂)
  const double zeta = hyp ? -1.0 : 1.0;
  const T num_re = hyp ? T(sinh(2.0 * s)) : T(sin(2.0 * s));
  const T num_im = hyp ? T(sin(2.0 * k1)) : T(sinh(2.0 * k1));
  out.z = Cx<T>(zeta * num_re / D, zeta * num_im / D);
  out.a2 = out.z.re / mu;
  out.b2 = out.z.im / mu;
  out.r = exp(k2) / (mu * sqrt(D));

  // ρ = μ (√D e^{−k₂})^{1/3} c^{2/3}; H = ρ³ r (z² + ε̃)|ε + a₃²| is then ±1.
  out.rho = cpow(c, 2.0 / 3.0) * T(mu * cbrt(sqrt(D) * exp(-k2)));
  const Cx<T> z2e = out.z * out.z + Cx<T>(T(out.eps_tilde));
  const Cx<T> hh = out.rho * out.rho * out.rho * z2e * T(out.r / (mu * mu));
  out.H = hh.re;

  // a₆ + ib₆ = (k₃ + ik₄)/ρ · √|ε + a₃²| · (ε̃ + z̄²)^{−1/2} = (k₃ + ik₄) c̄ / (ρ μ)
  const Cx<T> a6b6 = kk * conj(c) / (out.rho * Cx<T>(mu));
  out.a6 = a6b6.re;
  out.b6 = a6b6.im;

  // coefficient of (k₃ + ik₄) c̄ in γ₁ and of the sinh/sin(2k₁) term in a₁, b₁
  T lam{};
  switch (sys) {
    case SystemId::constraa: lam = 1.0 / t; break;
    case SystemId::cpk1: lam = -tan(t); break;
    case SystemId::kh: lam = -tanh(t); break;
    default: lam = cosh(t) / sinh(t); break;  // kh2
  }
  out.gamma1 = (kk * conj(c) * Cx<T>(lam) + Cx<T>(k1v, -k1u)) / out.rho;
  const Cx<T> a2b2(out.a2, out.b2);
  const T e3 = T(system_epsilon(sys)) + out.a3 * out.a3;
  out.gamma2 = conj(a2b2) * a6b6 / Cx<T>(e3);

  const T rho1 = out.rho.re, rho2 = -out.rho.im;  // ρ = ρ₁ − iρ₂
  const T pre = std::pow(2.0, 2.0 / 3.0) * exp(2.0 * k2 / 3.0) / (3.0 * mu * mu * D * D);
  if (!hyp) {
    const T s2 = sin(2.0 * s), sh = sinh(2.0 * k1);
    const T p = cos(s) * cosh(k1), q = sin(s) * sinh(k1);
    out.a1 = pre * (D * (rho1 * k2v + rho2 * k2u) + s2 * (rho1 * k1u - rho2 * k1v) - sh * (rho1 * k1v + rho2 * k1u) +
                    lam * sh * (p * (k4 * rho2 - k3 * rho1) + q * (k4 * rho1 + k3 * rho2)));
    out.b1 = pre * (D * (rho2 * k2v - rho1 * k2u) + s2 * (rho2 * k1u + rho1 * k1v) + sh * (rho1 * k1u - rho2 * k1v) +
                    lam * sh * (q * (k4 * rho2 - k3 * rho1) - p * (k4 * rho1 + k3 * rho2)));
  } else {
    const T s2 = sinh(2.0 * s), sn = sin(2.0 * k1);
    const T p = cosh(s) * cos(k1), q = sinh(s) * sin(k1);
    const T th = tanh(t);
    out.a1 = pre * (D * (rho1 * k2v + rho2 * k2u) + s2 * (rho2 * k1v - rho1 * k1u) + sn * (rho1 * k1v + rho2 * k1u) +
                    sn * th * (p * (k4 * rho2 - k3 * rho1) - q * (k4 * rho1 + k3 * rho2)));
    out.b1 = pre * (D * (rho2 * k2v - rho1 * k2u) - s2 * (rho2 * k1u + rho1 * k1v) - sn * (rho1 * k1u - rho2 * k1v) -
                    sn * th * (q * (k4 * rho2 - k3 * rho1) + p * (k4 * rho1 + k3 * rho2)));
  }
  out.f_coord = -t;
  out.g_coord = -out.s_orientation * s_in;
  return out;
}

template <typename T>
ClosedForm<T> singular(SystemId sys, const KPoint<T>& kp, const T& s_in, const T& t, int sign_in) {
  using std::sin, std::cos, std::exp, std::sinh, std::cosh, std::tan;
  if (sign_in != 1 && sign_in != -1) throw Error(ErrorCode::Configuration, "sign branch must be +1 or -1");
  ClosedForm<T> out;
  out.s_orientation = s_orientation(sys);
  // Evaluated with S = +∂s'. For the flat system s' = −s and the "+" formulas
  // (b₂ = a₃) are the b₂ = −√(ε + a₃²) member of the family.
  const bool mirrored = out.s_orientation < 0;
  const T s = mirrored ? T(-s_in) : s_in;
  const int sign = mirrored ? -sign_in : sign_in;
  a3_and_mu(sys, t, out.a3, out.mu);
  const T& k1 = kp.k[0];
  const T& k2 = kp.k[1];
  const T &k1u = kp.ku[0], &k1v = kp.kv[0], &k2u = kp.ku[1], &k2v = kp.kv[1];
  const T& mu = out.mu;
  const double sg = sign;
  out.eps_tilde = 1.0;
  out.a2 = T(0.0);
  out.b2 = sg / mu;
  out.z = Cx<T>(T(0.0), out.b2 * mu);
  // w = e^{k₁ ± 5is/3}, a₆ + ib₆ = w/μ²
  const T ph = sg * 5.0 * s / 3.0;
  out.w = Cx<T>(exp(k1) * cos(ph), exp(k1) * sin(ph));
  out.a6 = out.w.re / (mu * mu);
  out.b6 = out.w.im / (mu * mu);
  out.r = exp(k2) / mu;
  // ρ from w²(ε + a₃²)²ρ⁵r = 1
  const T m = exp(-(2.0 * k1 + k2) / 5.0);
  const T ph2 = -sg * 2.0 * s / 3.0;
  out.rho = Cx<T>(mu * m * cos(ph2), mu * m * sin(ph2));
  const Cx<T> r2 = out.rho * out.rho;
  const Cx<T> hh = out.w * out.w * r2 * r2 * out.rho * T(out.r / (mu * mu * mu * mu));
  out.H = hh.re;

  const T& lam = out.a3;
  const T e = exp((2.0 * k1 + k2) / 5.0);
  const T c2 = cos(2.0 * s / 3.0), s2 = sin(2.0 * s / 3.0);
  const T c5 = cos(5.0 * s / 3.0), s5 = sin(5.0 * s / 3.0);
  const Cx<T> e5(exp(k1) * cos(ph), exp(k1) * sin(ph));
  const Cx<T> e2(e * cos(sg * 2.0 * s / 3.0), e * sin(sg * 2.0 * s / 3.0));
  const Cx<T> grad = sign > 0 ? Cx<T>(k2v - 3.0 * k1v, -(k2u - 3.0 * k1u)) : Cx<T>(3.0 * k1v - k2v, -(3.0 * k1u - k2u));
  out.gamma1 = (e5 * T(-5.0 * lam) + e2 * grad) / Cx<T>(T(5.0 * mu));
  if (sign > 0) {
    out.a1 = (exp(k1) * c5 * lam + e * (c2 * k2v + s2 * k2u)) / (3.0 * mu);
    out.b1 = (exp(k1) * s5 * lam - e * (c2 * k2u - s2 * k2v)) / (3.0 * mu);
  } else {
    out.a1 = (-exp(k1) * c5 * lam + e * (c2 * k2v - s2 * k2u)) / (3.0 * mu);
    out.b1 = (exp(k1) * s5 * lam - e * (c2 * k2u + s2 * k2v)) / (3.0 * mu);
  }
  const T e3 = T(system_epsilon(sys)) + out.a3 * out.a3;
  out.gamma2 = conj(Cx<T>(out.a2, out.b2)) * Cx<T>(out.a6, out.b6) / Cx<T>(e3);
  out.f_coord = -t;
  out.g_coord = -out.s_orientation * s_in;
  return out;
}

}  // namespace detail

/// Closed forms at (s, t) for k-data at one (u, v) point. `sign` selects the
/// ± formulas of the z-singular systems and is ignored otherwise.
template <typename T>
ClosedForm<T> closed_form(SystemId sys, const KPoint<T>& kp, const T& s, const T& t, int sign = 1) {
  return z_singular(sys) ? detail::singular(sys, kp, s, t, sign) : detail::regular(sys, kp, s, t);
}

template <typename T>
FrameCoefficients to_coefficients(const ClosedForm<T>& cf) {
  FrameCoefficients f;
  f.a1 = primal(cf.a1);
  f.a2 = primal(cf.a2);
  f.a3 = primal(cf.a3);
  f.a6 = primal(cf.a6);
  f.b1 = primal(cf.b1);
  f.b2 = primal(cf.b2);
  f.b6 = primal(cf.b6);
  f.c6 = f.a3;
  f.d6 = 0.0;
  f.r = primal(cf.r);
  return f;
}

}  // namespace slag
