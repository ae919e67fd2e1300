// SPDX-License-Identifier: MIT
//
// First and second fundamental data of an immersion from its 2-jet.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "slag/ambient.hpp"
#include "slag/cubic.hpp"
#include "slag/immersion.hpp"

namespace slag {

inline MetricMatrix induced_metric(const Jet2& jet, double det_tol = 1e-12) {
  const int n = jet.n;
  MetricMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) g(i, j) = g(j, i) = real_product(jet.d1[static_cast<std::size_t>(i)], jet.d1[static_cast<std::size_t>(j)]);
  if (!(std::abs(g.determinant()) >= det_tol)) throw Error(ErrorCode::DegenerateMetric, "induced metric is degenerate");
  return g;
}

/// ω(∂_i, ∂_j) = g(∂_i, J∂_j), antisymmetrized.
inline Eigen::MatrixXd kahler_form_restriction(const Jet2& jet) {
  const int n = jet.n;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto& a = jet.d1[static_cast<std::size_t>(i)];
      const auto& b = jet.d1[static_cast<std::size_t>(j)];
      const double v = 0.5 * (real_product(a, apply_J(b)) - real_product(b, apply_J(a)));
      w(i, j) = v;
      w(j, i) = -v;
    }
  return w;
}

struct SecondFundamental {
  MetricMatrix g;
  CubicTensor c;
  double normal_residual = 0.0;  // part of d2 outside tangent ⊕ J·tangent ⊕ span{F, iF}
  double lift_residual = 0.0;    // |component of d2(i,j) along F − expected ∓g_ij|
  double c_asymmetry = 0.0;      // before symmetrization
};

/// Decomposes every d2(i,j) against tangent, J-tangent and (in lift modes)
/// position directions and returns C(∂_i,∂_j,∂_k) = g(d2(i,j), J∂_k),
/// symmetrized. Only a Lagrangian immersion makes the tangent and J-tangent
/// spaces orthogonal, so the Kähler form is checked as part of the split.
inline SecondFundamental second_fundamental_A(const Jet2& jet, const AmbientSpace& ambient, LiftMode lift,
                                              double normal_tol = 1e-6) {
  const int n = jet.n;
  const std::size_t m = jet.value.size();
  if (static_cast<int>(m) != ambient.complex_dim || jet.value.signature_index != ambient.signature_index)
    throw Error(ErrorCode::DimensionMismatch, "jet does not live in the given ambient space");

  SecondFundamental out;
  out.g = induced_metric(jet);

  const Eigen::MatrixXd omega = kahler_form_restriction(jet);
  const double scale = out.g.cwiseAbs().maxCoeff();
  if (omega.cwiseAbs().maxCoeff() > normal_tol * std::max(1.0, scale))
    throw Error(ErrorCode::NonLagrangian, "Kähler form does not vanish on the tangent space");

  // Real 2m-vectors with the ambient real product as diag(±1).
  std::vector<CVector> basis;
  for (int i = 0; i < n; ++i) basis.push_back(jet.d1[static_cast<std::size_t>(i)]);
  for (int i = 0; i < n; ++i) basis.push_back(apply_J(jet.d1[static_cast<std::size_t>(i)]));
  const int pos_index = static_cast<int>(basis.size());
  if (lift != LiftMode::none) {
    basis.push_back(jet.value);
    basis.push_back(apply_J(jet.value));
  }
  const int nb = static_cast<int>(basis.size());
  Eigen::MatrixXd gram(nb, nb);
  for (int a = 0; a < nb; ++a)
    for (int b = a; b < nb; ++b)
      gram(a, b) = gram(b, a) = real_product(basis[static_cast<std::size_t>(a)], basis[static_cast<std::size_t>(b)]);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() < nb) throw Error(ErrorCode::NonLagrangian, "tangent, normal and position directions are dependent");

  const double expected_sign = lift == LiftMode::sphere ? -1.0 : 1.0;
  out.c = CubicTensor(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const CVector& h = jet.d2(i, j);
      Eigen::VectorXd rhs(nb);
      for (int a = 0; a < nb; ++a) rhs(a) = real_product(basis[static_cast<std::size_t>(a)], h);
      const Eigen::VectorXd coef = lu.solve(rhs);
      CVector rest = h;
      for (int a = 0; a < nb; ++a) rest = rest - coef(a) * basis[static_cast<std::size_t>(a)];
      out.normal_residual = std::max(out.normal_residual, euclidean_norm(rest));
      if (lift != LiftMode::none) {
        // ⟨F,F⟩ = ±1 so the F-coefficient is ±⟨d2, F⟩; expected −g (sphere), +g (hyperboloid).
        out.lift_residual = std::max(out.lift_residual, std::abs(coef(pos_index) - expected_sign * out.g(i, j)));
      }
      for (int k = 0; k < n; ++k) {
        const double v = real_product(h, apply_J(jet.d1[static_cast<std::size_t>(k)]));
        out.c.at(i, j, k) = v;
        out.c.at(j, i, k) = v;
      }
    }
  if (out.normal_residual > normal_tol * std::max(1.0, scale))
    throw Error(ErrorCode::NonLagrangian, "second derivatives leave tangent ⊕ normal ⊕ position");
  out.c_asymmetry = out.c.asymmetry();
  out.c.symmetrize();
  return out;
}

}  // namespace slag
