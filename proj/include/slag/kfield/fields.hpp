// SPDX-License-Identifier: MIT
//
// Frame data of the generic branch at a point: coefficients, gauge fields,
// the coordinate frame and every directional derivative, all exact in
// (t, s) and exact in (u, v) relative to the supplied k-jet.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "slag/kfield/closed_form.hpp"
#include "slag/structure/equations.hpp"

namespace slag {

struct GaugeFields {
  double mu = 0.0;
  std::complex<double> rho, gamma1, gamma2, z, w;
  double f = 0.0, g_coord = 0.0;
  double eps_tilde = 1.0;
  double H_const = 0.0;
};

template <typename T>
GaugeFields to_gauge(const ClosedForm<T>& cf) {
  GaugeFields g;
  g.mu = primal(cf.mu);
  g.rho = to_std(cf.rho);
  g.gamma1 = to_std(cf.gamma1);
  g.gamma2 = to_std(cf.gamma2);
  g.z = to_std(cf.z);
  g.w = to_std(cf.w);
  g.f = primal(cf.f_coord);
  g.g_coord = primal(cf.g_coord);
  g.eps_tilde = cf.eps_tilde;
  g.H_const = primal(cf.H);
  return g;
}

inline KPoint<double> point_of(const KJet& j) { return {j.k, j.ku, j.kv}; }

/// Coefficients and gauge fields at (s, t) for the k-values at one (u, v).
inline std::pair<FrameCoefficients, GaugeFields> closed_form_fields(SystemId sys, const KJet& k, double s, double t,
                                                                    int sign = 1) {
  const ClosedForm<double> cf = closed_form(sys, point_of(k), s, t, sign);
  return {to_coefficients(cf), to_gauge(cf)};
}

/// Generic-branch sample in coordinates ordered (t, s, u, v).
struct GenericSample {
  FieldSample fs;
  GaugeFields gauge;
  Eigen::Matrix4d frame;        // columns X₁…X₄
  double bracket_residual = 0;  // max |[X_i,X_j] − (∇_{X_i}X_j − ∇_{X_j}X_i)|
};

namespace detail {

using D4 = Dual<double, 4>;

inline D4 variable(double x, std::size_t slot) {
  D4 d(x);
  d.d[slot] = 1.0;
  return d;
}

// The k-jet lifted to first-order duals over (t, s, u, v).
inline KPoint<D4> lift(const KJet& j) {
  KPoint<D4> p;
  for (std::size_t m = 0; m < 4; ++m) {
    p.k[m] = D4(j.k[m], {0.0, 0.0, j.ku[m], j.kv[m]});
    p.ku[m] = D4(j.ku[m], {0.0, 0.0, j.kuu[m], j.kuv[m]});
    p.kv[m] = D4(j.kv[m], {0.0, 0.0, j.kuv[m], j.kvv[m]});
  }
  return p;
}

}  // namespace detail

inline GenericSample generic_sample(SystemId sys, const KJet& k, double s, double t, int sign = 1) {
  using detail::D4;
  const ClosedForm<D4> cf = closed_form(sys, detail::lift(k), detail::variable(s, 1), detail::variable(t, 0), sign);
  const double sig = cf.s_orientation;
  // Frame entries as duals so their derivatives are available for brackets.
  std::array<std::array<D4, 4>, 4> e;  // e[i][a]: component a of X_i
  const Cx<D4> inv_rho = Cx<D4>(D4(1.0)) / cf.rho;
  e[0] = {-cf.gamma2.re, -sig * cf.gamma1.re, inv_rho.re, -inv_rho.im};
  e[1] = {-cf.gamma2.im, -sig * cf.gamma1.im, inv_rho.im, inv_rho.re};
  e[2] = {D4(0.0), sig / cf.mu, D4(0.0), D4(0.0)};
  e[3] = {D4(1.0), D4(0.0), D4(0.0), D4(0.0)};

  GenericSample out;
  out.gauge = to_gauge(cf);
  for (int i = 0; i < 4; ++i)
    for (int a = 0; a < 4; ++a) out.frame(a, i) = e[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)].v;

  auto along = [&](int i, const D4& c) {
    double v = 0.0;
    for (std::size_t a = 0; a < 4; ++a) v += out.frame(static_cast<int>(a), i) * c.d[a];
    return v;
  };
  const D4 c6 = cf.a3;
  const D4 d6(0.0);
  const std::array<const D4*, kCoefCount> coef = {&cf.a1, &cf.a2, &cf.a3, &cf.a6, &cf.b1,
                                                  &cf.b2, &cf.b6, &c6,    &d6,    &cf.r};
  out.fs.c = to_coefficients(cf);
  for (int i = 0; i < 4; ++i)
    for (std::size_t m = 0; m < kCoefCount; ++m) out.fs.X(i, static_cast<Coef>(m)) = along(i, *coef[m]);

  const ConnectionArray g = connection_general(out.fs.c);
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      for (std::size_t a = 0; a < 4; ++a) {
        const double bracket = along(static_cast<int>(i), e[j][a]) - along(static_cast<int>(j), e[i][a]);
        double expect = 0.0;
        for (std::size_t kk = 0; kk < 4; ++kk)
          expect += (g[i][j][kk] - g[j][i][kk]) * out.frame(static_cast<int>(a), static_cast<int>(kk));
        worst = std::max(worst, std::abs(bracket - expect));
      }
  out.bracket_residual = worst;
  return out;
}

}  // namespace slag
