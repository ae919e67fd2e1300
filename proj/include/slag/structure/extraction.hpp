// SPDX-License-Identifier: MIT
//
// Reads the adapted frame and its reduced coefficients off a 4-dimensional
// immersion: X₁, X₂ from the canonical cubic, X₃, X₄ spanning the null space
// and gauge-fixed, connection entries from ambient derivatives, directional
// derivatives by nested central differences.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "slag/catalog/cases.hpp"
#include "slag/cubic.hpp"
#include "slag/fundamental.hpp"
#include "slag/structure/equations.hpp"

namespace slag {

/// How X₃ is fixed inside the null distribution.
enum class NullGauge {
  along_nabla21,  // X₃ ∥ null part of ∇_{X₂}X₁ (b₃ = 0, b₂ ≥ 0)
  along_nabla11,  // X₃ ∥ null part of ∇_{X₁}X₁ (a₃ = 0, a₂ ≥ 0)
  coordinate,     // X₃ ∥ null part of the first parameter axis
  automatic,      // first of the above whose defining vector is nonzero at the centre point
};

/// Columns X₁…X₄ in parameter coordinates, orthonormal for the induced metric.
struct AdaptedFrame {
  Eigen::Matrix4d e;
  double r = 0.0;
};

namespace detail {

struct PartialFrame {
  Eigen::Vector4d x1, x2;
  Eigen::Matrix<double, 4, 2> null;
  MetricMatrix g;
  Jet2 jet;
  double r = 0.0;
};

inline std::vector<double> shift(std::span<const double> p, int axis, double d) {
  std::vector<double> q(p.begin(), p.end());
  q[static_cast<std::size_t>(axis)] += d;
  return q;
}

inline CVector push(const Jet2& jet, const Eigen::Vector4d& v) {
  CVector out = 0.0 * jet.d1[0];
  for (int a = 0; a < 4; ++a) out = out + v(a) * jet.d1[static_cast<std::size_t>(a)];
  return out;
}

// X₁, X₂ up to the S₃ ambiguity, resolved against `ref` when given.
inline PartialFrame partial_frame(const Immersion& imm, std::span<const double> p, const PartialFrame* ref) {
  PartialFrame f;
  f.jet = evaluate_jet(imm, p);
  const SecondFundamental sf = second_fundamental_A(f.jet, imm.ambient, imm.lift);
  const CanonicalFrame cf = canonicalize_cubic(sf.g, sf.c);
  f.g = sf.g;
  f.r = cf.r;
  f.x1 = cf.frame.col(0);
  f.x2 = cf.frame.col(1);
  f.null = cf.frame.rightCols(2);
  if (ref) {
    // Rotations by multiples of 2π/3 and X₂ → −X₂ preserve the canonical shape.
    double best = -1e300;
    Eigen::Vector4d b1 = f.x1, b2 = f.x2;
    for (int k = 0; k < 3; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 3.0;
      const Eigen::Vector4d y1 = std::cos(t) * f.x1 + std::sin(t) * f.x2;
      for (double s : {1.0, -1.0}) {
        const Eigen::Vector4d y2 = s * (-std::sin(t) * f.x1 + std::cos(t) * f.x2);
        const double score = y1.dot(f.g * ref->x1) + y2.dot(f.g * ref->x2);
        if (score > best) {
          best = score;
          b1 = y1;
          b2 = y2;
        }
      }
    }
    f.x1 = b1;
    f.x2 = b2;
  }
  return f;
}

// D_{X}(F_* Y) for Y with parameter-space derivatives dy[a] = ∂_a Y.
inline CVector ambient_derivative(const Jet2& jet, const Eigen::Vector4d& x, const Eigen::Vector4d& y,
                                  const std::array<Eigen::Vector4d, 4>& dy) {
  CVector out = 0.0 * jet.d1[0];
  for (int b = 0; b < 4; ++b) {
    if (x(b) == 0.0) continue;
    Eigen::Vector4d dir = dy[static_cast<std::size_t>(b)];
    CVector term = push(jet, dir);
    for (int a = 0; a < 4; ++a) term = term + y(a) * jet.d2(a, b);
    out = out + x(b) * term;
  }
  return out;
}

inline void require_stencil(const Immersion& imm, std::span<const double> p, double reach) {
  for (std::size_t a = 0; a < 4; ++a)
    if (p[a] - reach < imm.domain.lo[a] - 1e-12 || p[a] + reach > imm.domain.hi[a] + 1e-12)
      throw Error(ErrorCode::InsufficientStencil, imm.name + ": stencil leaves the parameter box");
}

// Components, in the null basis, of the vector that fixes X₃.
inline Eigen::Vector2d null_direction(const Immersion& imm, std::span<const double> p, const PartialFrame& f,
                                      NullGauge gauge, double h) {
  if (gauge == NullGauge::coordinate) return f.null.transpose() * f.g * Eigen::Vector4d::Unit(0);
  std::array<Eigen::Vector4d, 4> dx1;
  for (int a = 0; a < 4; ++a) {
    const auto fp = partial_frame(imm, shift(p, a, h), &f);
    const auto fm = partial_frame(imm, shift(p, a, -h), &f);
    dx1[static_cast<std::size_t>(a)] = (fp.x1 - fm.x1) / (2.0 * h);
  }
  const Eigen::Vector4d& dir = gauge == NullGauge::along_nabla21 ? f.x2 : f.x1;
  const CVector w = ambient_derivative(f.jet, dir, f.x1, dx1);
  Eigen::Vector2d c;
  for (int m = 0; m < 2; ++m) c(m) = real_product(w, push(f.jet, f.null.col(m)));
  return c;
}

inline NullGauge resolve_gauge(const Immersion& imm, std::span<const double> p, const PartialFrame& f, double h) {
  const double floor = 1e-6 * std::max(1.0, f.r);
  if (null_direction(imm, p, f, NullGauge::along_nabla21, h).norm() > floor) return NullGauge::along_nabla21;
  if (null_direction(imm, p, f, NullGauge::along_nabla11, h).norm() > floor) return NullGauge::along_nabla11;
  return NullGauge::coordinate;
}

}  // namespace detail

/// Resolves NullGauge::automatic at p; other gauges are returned unchanged.
inline NullGauge resolve_gauge(const Immersion& imm, std::span<const double> p, NullGauge gauge, double h) {
  if (gauge != NullGauge::automatic) return gauge;
  const detail::PartialFrame f = detail::partial_frame(imm, p, nullptr);
  return detail::resolve_gauge(imm, p, f, h);
}

/// Adapted frame at p. `ref` (a nearby frame) removes the discrete ambiguity
/// of X₁, X₂ and the sign of X₃ under the coordinate gauge.
inline AdaptedFrame adapted_frame(const Immersion& imm, std::span<const double> p, NullGauge gauge, double h,
                                  const AdaptedFrame* ref = nullptr) {
  if (imm.param_dim != 4) throw Error(ErrorCode::DimensionMismatch, "adapted frames need four parameters");
  detail::PartialFrame ref12;
  if (ref) {
    ref12.x1 = ref->e.col(0);
    ref12.x2 = ref->e.col(1);
  }
  const detail::PartialFrame f = detail::partial_frame(imm, p, ref ? &ref12 : nullptr);
  if (gauge == NullGauge::automatic) gauge = detail::resolve_gauge(imm, p, f, h);
  const Eigen::Vector2d c = detail::null_direction(imm, p, f, gauge, h);
  if (!(c.norm() > 1e-10))
    throw Error(ErrorCode::SingularGauge, imm.name + ": null-direction gauge is undefined at this point");
  AdaptedFrame out;
  out.r = f.r;
  out.e.col(0) = f.x1;
  out.e.col(1) = f.x2;
  Eigen::Vector4d x3 = f.null * (c / c.norm());
  if (gauge == NullGauge::coordinate && ref && x3.dot(f.g * ref->e.col(2)) < 0) x3 = -x3;
  Eigen::Vector4d x4 = f.null * Eigen::Vector2d(-c(1), c(0)) / c.norm();
  out.e.col(2) = x3;
  out.e.col(3) = x4;
  if (out.e.determinant() < 0) out.e.col(3) = -x4;
  return out;
}

/// Connection entries Γ[i][j][k] = g(∇_{X_i}X_j, X_k) of the adapted frame at p.
struct ExtractedConnection {
  AdaptedFrame frame;
  ConnectionArray gamma{};
  FrameCoefficients coefficients;
};

inline ExtractedConnection extract_connection(const Immersion& imm, std::span<const double> p, NullGauge gauge,
                                              double h, const AdaptedFrame* ref = nullptr) {
  gauge = resolve_gauge(imm, p, gauge, h);
  ExtractedConnection out;
  out.frame = adapted_frame(imm, p, gauge, h, ref);
  const Jet2 jet = evaluate_jet(imm, p);
  std::array<std::array<Eigen::Vector4d, 4>, 4> de;  // de[j][a] = ∂_a X_j
  for (int a = 0; a < 4; ++a) {
    const AdaptedFrame fp = adapted_frame(imm, detail::shift(p, a, h), gauge, h, &out.frame);
    const AdaptedFrame fm = adapted_frame(imm, detail::shift(p, a, -h), gauge, h, &out.frame);
    for (int j = 0; j < 4; ++j)
      de[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)] = (fp.e.col(j) - fm.e.col(j)) / (2.0 * h);
  }
  std::array<CVector, 4> fx;
  for (int k = 0; k < 4; ++k) fx[static_cast<std::size_t>(k)] = detail::push(jet, out.frame.e.col(k));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const CVector w = detail::ambient_derivative(jet, out.frame.e.col(static_cast<int>(i)),
                                                   out.frame.e.col(static_cast<int>(j)), de[j]);
      for (std::size_t k = 0; k < 4; ++k) out.gamma[i][j][k] = real_product(w, fx[k]);
    }
  auto& c = out.coefficients;
  const auto& g = out.gamma;
  c.a1 = g[0][0][1];
  c.a2 = g[0][0][2];
  c.a3 = g[0][0][3];
  c.a6 = g[0][2][3];
  c.b1 = g[1][0][1];
  c.b2 = g[1][0][2];
  c.b6 = g[1][2][3];
  c.c6 = g[2][2][3];
  c.d6 = g[3][2][3];
  c.r = out.frame.r;
  return out;
}

/// Largest deviation of the extracted connection from the reduced table built
/// out of its own coefficients.
inline double table_deviation(const ExtractedConnection& ec) {
  const ConnectionArray t = connection_general(ec.coefficients);
  double m = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) m = std::max(m, std::abs(ec.gamma[i][j][k] - t[i][j][k]));
  return m;
}

/// Coefficients and their X_i-derivatives at p; total stencil reach 3h.
inline FieldSample extract_field_sample(const Immersion& imm, std::span<const double> p, NullGauge gauge, double h) {
  detail::require_stencil(imm, p, 3.0 * h);
  gauge = resolve_gauge(imm, p, gauge, h);
  const ExtractedConnection centre = extract_connection(imm, p, gauge, h);
  FieldSample fs;
  fs.c = centre.coefficients;
  std::array<FrameCoefficients, 4> dp;  // ∂_a of every coefficient
  for (int a = 0; a < 4; ++a) {
    const auto cp = extract_connection(imm, detail::shift(p, a, h), gauge, h, &centre.frame).coefficients;
    const auto cm = extract_connection(imm, detail::shift(p, a, -h), gauge, h, &centre.frame).coefficients;
    for (std::size_t k = 0; k < kCoefCount; ++k)
      dp[static_cast<std::size_t>(a)][static_cast<Coef>(k)] =
          (cp[static_cast<Coef>(k)] - cm[static_cast<Coef>(k)]) / (2.0 * h);
  }
  for (int i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < kCoefCount; ++k) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += centre.frame.e(a, i) * dp[static_cast<std::size_t>(a)][static_cast<Coef>(k)];
      fs.X(i, static_cast<Coef>(k)) = v;
    }
  return fs;
}

}  // namespace slag
