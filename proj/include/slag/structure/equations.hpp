// SPDX-License-Identifier: MIT
//
// Residuals of the frame equations: connection tables, Codazzi relations
// for r, the Gauss system for the reduced coefficients and the curvature
// identity R = ε(X∧Y) + [A_X, A_Y].
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <limits>
#include <span>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "slag/catalog/cases.hpp"
#include "slag/fundamental.hpp"
#include "slag/structure/frame_data.hpp"

namespace slag {

// ---------------------------------------------------------------------------
// Codazzi relations for r.

inline const std::vector<std::string>& codazzi_labels() {
  static const std::vector<std::string> l = {"Z_r.re", "Z_r.im", "X3_r", "X4_r"};
  return l;
}

/// (X₁+iX₂)(r) − 3ir(a₁+ib₁) split into real and imaginary part, X₃(r) − r a₂, X₄(r) − r a₃.
inline std::vector<double> codazzi_residual(const FieldSample& fs) {
  const auto& c = fs.c;
  return {fs.X(0, Coef::r) + 3.0 * c.r * c.b1, fs.X(1, Coef::r) - 3.0 * c.r * c.a1, fs.X(2, Coef::r) - c.r * c.a2,
          fs.X(3, Coef::r) - c.r * c.a3};
}

// ---------------------------------------------------------------------------
// Gauss system for the reduced coefficients; complex equations as (re, im).
// Labels name the differentiated quantity: Z is X₁+iX₂, a2b2 the pair
// (a₂, b₂), curl/div the X₁, X₂ combinations of a pair.

inline const std::vector<std::string>& gauss_labels() {
  static const std::vector<std::string> l = {
      "Z_a2b2.re", "Z_a2b2.im", "X3_a2b2.re",  "X3_a2b2.im", "X4_a2b2.re",  "X4_a2b2.im",   "Z_a3.re",
      "Z_a3.im", "X3_a3",     "X4_a3",     "curl_a6b6",  "X3_a6b6.re",  "X3_a6b6.im",   "X4_a6b6.re",
      "X4_a6b6.im",  "curl_a1b1",   "div_a1b1",   "X3_a1",   "X3_b1",    "X4_a1b1.re",   "X4_a1b1.im"};
  return l;
}

/// Left minus right side of every equation, in gauss_labels() order.
inline std::vector<double> gauss_system_residual(const FieldSample& fs, int epsilon) {
  const auto& c = fs.c;
  const double e = epsilon;
  auto X = [&](int i, Coef k) { return fs.X(i, k); };
  using enum Coef;
  return {
      // (X₁+iX₂)(a₂−ib₂) = a₃(a₆+ib₆)
      X(0, a2) + X(1, b2) - c.a3 * c.a6,
      X(1, a2) - X(0, b2) - c.a3 * c.b6,
      // X₃(a₂+ib₂) = ε + a₃² + (a₂+ib₂)²
      X(2, a2) - (e + c.a3 * c.a3 + c.a2 * c.a2 - c.b2 * c.b2),
      X(2, b2) - 2.0 * c.a2 * c.b2,
      // X₄(a₂+ib₂) = a₃(a₂+ib₂)
      X(3, a2) - c.a3 * c.a2,
      X(3, b2) - c.a3 * c.b2,
      // (X₁+iX₂)(a₃) = −(a₂−ib₂)(a₆+ib₆)
      X(0, a3) + (c.a2 * c.a6 + c.b2 * c.b6),
      X(1, a3) + (c.a2 * c.b6 - c.b2 * c.a6),
      // X₃(a₃) = 0
      X(2, a3),
      // X₄(a₃) = a₃² + ε
      X(3, a3) - (c.a3 * c.a3 + e),
      // X₁(b₆) − X₂(a₆) = −(a₁a₆ + b₁b₆)
      X(0, b6) - X(1, a6) + (c.a1 * c.a6 + c.b1 * c.b6),
      // X₃(a₆+ib₆) = (5/3) i b₂ (a₆+ib₆)
      X(2, a6) + 5.0 / 3.0 * c.b2 * c.b6,
      X(2, b6) - 5.0 / 3.0 * c.b2 * c.a6,
      // X₄(a₆+ib₆) = 2a₃(a₆+ib₆)
      X(3, a6) - 2.0 * c.a3 * c.a6,
      X(3, b6) - 2.0 * c.a3 * c.b6,
      // X₁(b₁) − X₂(a₁) = 2r² − (ε+a₃²) − (5/3)b₂² − a₂² − a₁² − b₁²
      X(0, b1) - X(1, a1) -
          (2.0 * c.r * c.r - (e + c.a3 * c.a3) - 5.0 / 3.0 * c.b2 * c.b2 - c.a2 * c.a2 - c.a1 * c.a1 - c.b1 * c.b1),
      // X₂(b₁) + X₁(a₁) = −(2/3)a₂b₂
      X(1, b1) + X(0, a1) + 2.0 / 3.0 * c.a2 * c.b2,
      // 3X₃(a₁) − X₁(b₂) = 3a₁a₂ − 2b₁b₂
      3.0 * X(2, a1) - X(0, b2) - (3.0 * c.a1 * c.a2 - 2.0 * c.b1 * c.b2),
      // 3X₃(b₁) − X₂(b₂) = 2b₂a₁ + 3b₁a₂
      3.0 * X(2, b1) - X(1, b2) - (2.0 * c.b2 * c.a1 + 3.0 * c.b1 * c.a2),
      // X₄(a₁+ib₁) = a₃(a₁+ib₁) + (b₂/3)(a₆+ib₆)
      X(3, a1) - c.a3 * c.a1 - c.b2 / 3.0 * c.a6,
      X(3, b1) - c.a3 * c.b1 - c.b2 / 3.0 * c.b6,
  };
}

// ---------------------------------------------------------------------------
// Connection tables. gamma[i][j][k] is the X_k component of ∇_{X_i}X_j.

using ConnectionArray = std::array<std::array<std::array<double, 4>, 4>, 4>;

namespace detail {

// Sets ∇_{X_i}X_j ∋ v X_k together with the skew partner ∇_{X_i}X_k ∋ −v X_j.
inline void put_skew(ConnectionArray& g, int i, int j, int k, double v) {
  g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = v;
  g[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = -v;
}

}  // namespace detail

/// The general adapted-frame table, valid on every branch once a₄ = −b₂,
/// a₅ = 0, b₃ = 0, b₄ = a₂, b₅ = a₃, c₁ = b₂/3, c₂…c₅ = 0, d₁…d₅ = 0.
inline ConnectionArray connection_general(const FrameCoefficients& f) {
  ConnectionArray g{};
  using detail::put_skew;
  // ∇_{X₁}
  put_skew(g, 0, 0, 1, f.a1);
  put_skew(g, 0, 0, 2, f.a2);
  put_skew(g, 0, 0, 3, f.a3);
  put_skew(g, 0, 1, 2, -f.b2);
  put_skew(g, 0, 2, 3, f.a6);
  // ∇_{X₂}
  put_skew(g, 1, 0, 1, f.b1);
  put_skew(g, 1, 0, 2, f.b2);
  put_skew(g, 1, 1, 2, f.a2);
  put_skew(g, 1, 1, 3, f.a3);
  put_skew(g, 1, 2, 3, f.b6);
  // ∇_{X₃}
  put_skew(g, 2, 0, 1, f.b2 / 3.0);
  put_skew(g, 2, 2, 3, f.c6);
  // ∇_{X₄}
  put_skew(g, 3, 2, 3, f.d6);
  return g;
}

/// Table for the given case. Enforces the branch's defining conditions
/// (tolerance `tol`) and raises BranchViolation when they fail.
inline ConnectionArray connection_table(const CaseId& cs, const FrameCoefficients& f, double tol = 1e-10) {
  auto require = [&](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::BranchViolation, cs.name + ": " + what);
  };
  auto zero = [&](double v) { return std::abs(v) <= tol; };
  switch (cs.branch) {
    case Branch::b2zero_a2nonzero:
    case Branch::b2zero_a2zero: {
      require(zero(f.b2), "b2 must vanish");
      require(zero(f.a3), "a3 must vanish (X3 chosen along the N2 part of nabla_X1 X1)");
      require(zero(f.a6) && zero(f.b6) && zero(f.c6), "a6, b6, c6 must vanish");
      if (cs.branch == Branch::b2zero_a2zero)
        require(zero(f.a2), "a2 must vanish");
      else
        require(!zero(f.a2), "a2 must be nonzero");
      if (cs.epsilon == 0 || cs.branch == Branch::b2zero_a2zero)
        require(zero(f.d6), "d6 must vanish");
      else
        // ∇_{X₄}X₃ = ±X₄/a₂ with + for ε = 1 and − for ε = −1.
        require(std::abs(f.d6 - cs.epsilon / f.a2) <= tol * std::max(1.0, std::abs(f.d6)),
                "d6 must equal epsilon/a2");
      return connection_general(f);
    }
    case Branch::Nplus_a3zero:
    case Branch::Nplus_a3nonzero:
    case Branch::generic_zregular:
    case Branch::generic_zsingular: {
      require(!zero(f.b2), "b2 must be nonzero");
      require(std::abs(f.c6 - f.a3) <= tol * std::max(1.0, std::abs(f.a3)), "c6 must equal a3");
      require(zero(f.d6), "d6 must vanish");
      if (cs.branch == Branch::Nplus_a3zero || cs.branch == Branch::Nplus_a3nonzero)
        require(zero(f.a6) && zero(f.b6), "a6 + i b6 must vanish when N+ is integrable");
      if (cs.branch == Branch::Nplus_a3zero) require(zero(f.a3), "a3 must vanish");
      if (cs.branch == Branch::generic_zsingular) require(zero(f.a2), "a2 must vanish on the z-singular branch");
      return connection_general(f);
    }
  }
  throw Error(ErrorCode::BranchViolation, "unknown branch");
}

/// Largest |Γ_ij^k + Γ_ik^j|: zero for any metric connection in an orthonormal frame.
inline double metric_compatibility_defect(const ConnectionArray& g) {
  double m = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) m = std::max(m, std::abs(g[i][j][k] + g[i][k][j]));
  return m;
}

/// X_i-derivatives of every coefficient gathered into a FrameCoefficients (i = 0..3).
inline FrameCoefficients derivative_coefficients(const FieldSample& fs, int i) {
  FrameCoefficients d;
  for (std::size_t k = 0; k < kCoefCount; ++k) d[static_cast<Coef>(k)] = fs.X(i, static_cast<Coef>(k));
  return d;
}

/// Canonical shape operators in the orthonormal frame: (A_i)(l,k) = A(X_i,X_k)^l.
inline std::array<Eigen::Matrix4d, 4> frame_shape_operators(double r) {
  const CubicTensor p = canonical_pattern(r, 4);
  std::array<Eigen::Matrix4d, 4> a;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) a[static_cast<std::size_t>(i)](l, k) = p(i, k, l);
  return a;
}

/// Gauss equation written directly in the frame with the general table:
/// R(X_i,X_j)X_k − ε(X_i∧X_j)X_k − [A_i,A_j]X_k for all i < j, every k, l.
/// Unlike gauss_system_residual it does not presuppose c₆ = a₃, d₆ = 0, so it
/// applies on every branch.
inline std::vector<double> frame_gauss_residual(const FieldSample& fs, int epsilon) {
  const ConnectionArray g = connection_general(fs.c);
  std::array<ConnectionArray, 4> dg;
  for (int i = 0; i < 4; ++i) dg[static_cast<std::size_t>(i)] = connection_general(derivative_coefficients(fs, i));
  const auto a = frame_shape_operators(fs.c.r);
  std::vector<double> out;
  out.reserve(6 * 16);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      const Eigen::Matrix4d comm = a[i] * a[j] - a[j] * a[i];
      for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l) {
          double rv = dg[i][j][k][l] - dg[j][i][k][l];
          for (std::size_t m = 0; m < 4; ++m)
            rv += g[j][k][m] * g[i][m][l] - g[i][k][m] * g[j][m][l] - (g[i][j][m] - g[j][i][m]) * g[m][k][l];
          double rhs = comm(static_cast<int>(l), static_cast<int>(k));
          if (l == i && k == j) rhs += epsilon;
          if (l == j && k == i) rhs -= epsilon;
          out.push_back(rv - rhs);
        }
    }
  return out;
}

/// Codazzi equation in the frame: (∇_{X_i}A)(X_j,X_k) − (∇_{X_j}A)(X_i,X_k) for i < j.
inline std::vector<double> frame_codazzi_residual(const FieldSample& fs) {
  const ConnectionArray g = connection_general(fs.c);
  const CubicTensor p = canonical_pattern(1.0, 4);
  const double r = fs.c.r;
  // (∇_i A)(j,k)^l
  auto nabla_a = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    const int ii = static_cast<int>(i), jj = static_cast<int>(j), kk = static_cast<int>(k), ll = static_cast<int>(l);
    double v = fs.X(ii, Coef::r) * p(jj, kk, ll);
    for (std::size_t m = 0; m < 4; ++m) {
      const int mm = static_cast<int>(m);
      v += r * p(jj, kk, mm) * g[i][m][l];
      v -= g[i][j][m] * r * p(mm, kk, ll);
      v -= g[i][k][m] * r * p(jj, mm, ll);
    }
    return v;
  };
  std::vector<double> out;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l) out.push_back(nabla_a(i, j, k, l) - nabla_a(j, i, k, l));
  return out;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// ---------------------------------------------------------------------------
// Curvature identity.

/// Shape operators A_i (A_i)^l_k = A(∂_i, ∂_k)^l = g^{lm} C_{ikm}.
inline std::vector<Eigen::MatrixXd> shape_operators(const MetricMatrix& g, const CubicTensor& c) {
  const int n = c.dim();
  const Eigen::MatrixXd gi = g.inverse();
  std::vector<Eigen::MatrixXd> a(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) a[static_cast<std::size_t>(i)](l, k) += gi(l, m) * c(i, k, m);
  return a;
}

/// Riemann tensor R(∂_i,∂_j)∂_k = Σ_l R[i][j](l,k) ∂_l.
using RiemannTensor = std::vector<std::vector<Eigen::MatrixXd>>;

/// max |R(∂_i,∂_j)∂_k − ε(g_jk ∂_i − g_ik ∂_j) − [A_i, A_j]∂_k| over components.
inline double curvature_identity_mismatch(const RiemannTensor& riem, const MetricMatrix& g, const CubicTensor& c,
                                          int epsilon) {
  const int n = c.dim();
  const auto a = shape_operators(g, c);
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      Eigen::MatrixXd rhs = a[ui] * a[uj] - a[uj] * a[ui];
      for (int k = 0; k < n; ++k) {
        rhs(i, k) += epsilon * g(j, k);
        rhs(j, k) -= epsilon * g(i, k);
      }
      m = std::max(m, (riem[ui][uj] - rhs).cwiseAbs().maxCoeff());
    }
  return m;
}

/// Riemann tensor from finite differences of the induced metric around
/// `point` with step h; order 2 (3-point) or 4 (5-point) central stencils.
inline RiemannTensor riemann_from_metric_fd(const Immersion& imm, std::span<const double> point, double h,
                                            int order = 4) {
  if (order != 2 && order != 4) throw Error(ErrorCode::Configuration, "stencil order must be 2 or 4");
  const int n = imm.param_dim;
  const int reach = order / 2;
  for (int a = 0; a < n; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (point[ua] - reach * h < imm.domain.lo[ua] - 1e-12 || point[ua] + reach * h > imm.domain.hi[ua] + 1e-12)
      throw Error(ErrorCode::InsufficientStencil, imm.name + ": stencil leaves the parameter box");
  }
  auto metric_at = [&](const std::vector<double>& p) {
    const Jet2 j = evaluate_jet(imm, p);
    MetricMatrix g(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) g(i, k) = real_product(j.d1[static_cast<std::size_t>(i)], j.d1[static_cast<std::size_t>(k)]);
    return g;
  };
  // Central-difference weights for the first derivative.
  const std::vector<std::pair<int, double>> w1 =
      order == 2 ? std::vector<std::pair<int, double>>{{-1, -0.5}, {1, 0.5}}
                 : std::vector<std::pair<int, double>>{{-2, 1.0 / 12}, {-1, -8.0 / 12}, {1, 8.0 / 12}, {2, -1.0 / 12}};
  const std::vector<std::pair<int, double>> w2 =
      order == 2 ? std::vector<std::pair<int, double>>{{-1, 1.0}, {0, -2.0}, {1, 1.0}}
                 : std::vector<std::pair<int, double>>{
                       {-2, -1.0 / 12}, {-1, 16.0 / 12}, {0, -30.0 / 12}, {1, 16.0 / 12}, {2, -1.0 / 12}};
  const std::vector<double> base(point.begin(), point.end());
  auto shifted = [&](int a, int da, int b, int db) {
    auto p = base;
    if (a >= 0) p[static_cast<std::size_t>(a)] += da * h;
    if (b >= 0) p[static_cast<std::size_t>(b)] += db * h;
    return p;
  };
  const MetricMatrix g0 = metric_at(base);
  std::vector<MetricMatrix> dg(static_cast<std::size_t>(n), MetricMatrix::Zero(n, n));
  std::vector<std::vector<MetricMatrix>> ddg(static_cast<std::size_t>(n),
                                             std::vector<MetricMatrix>(static_cast<std::size_t>(n), MetricMatrix::Zero(n, n)));
  for (int a = 0; a < n; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    for (auto [o, w] : w1) dg[ua] += (w / h) * metric_at(shifted(a, o, -1, 0));
    for (auto [o, w] : w2) ddg[ua][ua] += (w / (h * h)) * (o == 0 ? g0 : metric_at(shifted(a, o, -1, 0)));
    for (int b = a + 1; b < n; ++b) {
      const auto ub = static_cast<std::size_t>(b);
      for (auto [oa, wa] : w1)
        for (auto [ob, wb] : w1) ddg[ua][ub] += (wa * wb / (h * h)) * metric_at(shifted(a, oa, b, ob));
      ddg[ub][ua] = ddg[ua][ub];
    }
  }
  const Eigen::MatrixXd gi = g0.inverse();
  // Γ^l_{ij} = ½ g^{lm}(∂_i g_jm + ∂_j g_im − ∂_m g_ij) and its derivative along ∂_k.
  auto gamma_lower = [&](int i, int j, int m) {
    return 0.5 * (dg[static_cast<std::size_t>(i)](j, m) + dg[static_cast<std::size_t>(j)](i, m) -
                  dg[static_cast<std::size_t>(m)](i, j));
  };
  auto dgamma_lower = [&](int k, int i, int j, int m) {
    const auto uk = static_cast<std::size_t>(k);
    return 0.5 * (ddg[uk][static_cast<std::size_t>(i)](j, m) + ddg[uk][static_cast<std::size_t>(j)](i, m) -
                  ddg[uk][static_cast<std::size_t>(m)](i, j));
  };
  std::vector<std::vector<Eigen::VectorXd>> gam(static_cast<std::size_t>(n),
                                                std::vector<Eigen::VectorXd>(static_cast<std::size_t>(n)));
  std::vector<std::vector<std::vector<Eigen::VectorXd>>> dgam(
      static_cast<std::size_t>(n), std::vector<std::vector<Eigen::VectorXd>>(
                                       static_cast<std::size_t>(n), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(n))));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd low(n);
      for (int m = 0; m < n; ++m) low(m) = gamma_lower(i, j, m);
      gam[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = gi * low;
      for (int k = 0; k < n; ++k) {
        Eigen::VectorXd dlow(n);
        for (int m = 0; m < n; ++m) dlow(m) = dgamma_lower(k, i, j, m);
        // ∂_k(g⁻¹ v) = g⁻¹ ∂_k v − g⁻¹ (∂_k g) g⁻¹ v
        dgam[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            gi * dlow - gi * dg[static_cast<std::size_t>(k)] * gi * low;
      }
    }
  RiemannTensor riem(static_cast<std::size_t>(n), std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j), uk = static_cast<std::size_t>(k);
        Eigen::VectorXd v = dgam[ui][uj][uk] - dgam[uj][ui][uk];
        for (int m = 0; m < n; ++m) {
          const auto um = static_cast<std::size_t>(m);
          v += gam[uj][uk](m) * gam[ui][um] - gam[ui][uk](m) * gam[uj][um];
        }
        riem[ui][uj].col(k) = v;
      }
  return riem;
}

/// Curvature identity mismatch at a sample point of a verified immersion.
inline double curvature_identity_residual(const Immersion& imm, std::span<const double> point, int epsilon, double h,
                                          int order = 4) {
  const RiemannTensor riem = riemann_from_metric_fd(imm, point, h, order);
  const SecondFundamental sf = second_fundamental_A(evaluate_jet(imm, point), imm.ambient, imm.lift);
  return curvature_identity_mismatch(riem, sf.g, sf.c, epsilon);
}

/// Default step for the 5-point stencils: the curvature needs second
/// derivatives of the metric, so the balance of truncation (h⁴) against
/// rounding (ε/h²) sits at ε^{1/6}, scaled by the smallest box side.
inline double default_curvature_step(const Immersion& imm) {
  double side = 1e300;
  for (std::size_t a = 0; a < imm.domain.dim(); ++a) side = std::min(side, imm.domain.hi[a] - imm.domain.lo[a]);
  return std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0) * side;
}

// ---------------------------------------------------------------------------

/// Running max per labeled equation, serialised as {equation_id, max_abs, argmax_point}.
class ResidualTable {
 public:
  void add(const std::vector<std::string>& labels, const std::vector<double>& values, const std::vector<double>& at) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto& e = rows_[labels[i]];
      if (!e.seen || !(std::abs(values[i]) <= e.max_abs)) {
        e.max_abs = std::abs(values[i]);
        e.at = at;
        e.seen = true;
      }
      if (std::find(order_.begin(), order_.end(), labels[i]) == order_.end()) order_.push_back(labels[i]);
    }
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& [k, e] : rows_) m = std::max(m, e.max_abs);
    return m;
  }
  double max_abs(const std::string& label) const { return rows_.at(label).max_abs; }
  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& k : order_) {
      const auto& e = rows_.at(k);
      out.push_back({{"equation_id", k}, {"max_abs", e.max_abs}, {"argmax_point", e.at}});
    }
    return out;
  }

 private:
  struct Entry {
    double max_abs = 0.0;
    std::vector<double> at;
    bool seen = false;
  };
  std::map<std::string, Entry> rows_;
  std::vector<std::string> order_;
};

}  // namespace slag
