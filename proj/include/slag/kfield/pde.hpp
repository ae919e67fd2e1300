// SPDX-License-Identifier: MIT
//
// Pointwise form of the k-field systems: given k, its first derivatives and
// its Laplacian at a point, the defect of each equation. The two first-order
// equations (four-field systems only) come first, then Δk₁, then Δk₂.
#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "slag/kfield/closed_form.hpp"

namespace slag {

/// Equation labels in the order pointwise_residual returns them.
inline std::vector<std::string> pde_labels(SystemId sys) {
  if (field_count(sys) == 2) return {"lap_k1", "lap_k2"};
  return {"cr_minus", "cr_plus", "lap_k1", "lap_k2"};
}

/// Right-hand sides of Δk₁ and Δk₂.
template <typename T>
std::array<T, 2> laplacian_rhs(SystemId sys, const std::array<T, 4>& k) {
  using std::exp, std::sinh, std::cosh, std::sin, std::cos;
  const T &k1 = k[0], &k2 = k[1];
  const T kk = k[2] * k[2] + k[3] * k[3];
  const double c13 = std::cbrt(2.0);
  switch (sys) {
    case SystemId::constraa: {
      const T e = exp(-2.0 * k2 / 3.0);
      return {T(-c13 * e * sinh(2.0 * k1)), T(3.0 * c13 * e * (cosh(2.0 * k1) - exp(2.0 * k2)))};
    }
    case SystemId::cpk1: {
      const T e = exp(-2.0 * k2 / 3.0);
      return {T(e * sinh(2.0 * k1) / 2.0 * (-2.0 * c13 + exp(2.0 * k2 / 3.0) * kk)),
              T(3.0 * c13 * e * (cosh(2.0 * k1) - exp(2.0 * k2)))};
    }
    case SystemId::kh: {
      const T e = exp(-2.0 * k2 / 3.0);
      return {T(sin(2.0 * k1) / 2.0 * (2.0 * c13 * e + kk)), T(-3.0 * c13 * e * (exp(2.0 * k2) + cos(2.0 * k1)))};
    }
    case SystemId::kh2: {
      const T e = exp(-2.0 * k2 / 3.0);
      return {T(-sinh(2.0 * k1) * (c13 * e + kk / 2.0)), T(3.0 * c13 * e * (cosh(2.0 * k1) - exp(2.0 * k2)))};
    }
    case SystemId::constrab: {
      const T e = exp(-0.4 * (2.0 * k1 + k2));
      return {T(e * (6.0 - 2.0 * exp(2.0 * k2))), T(e * (8.0 - 6.0 * exp(2.0 * k2)))};
    }
    case SystemId::cpk2: {
      const T e = exp(-0.4 * (2.0 * k1 + k2));
      return {T(2.0 * e * (3.0 - exp(2.0 * k1) - exp(2.0 * k2))), T(e * (8.0 - exp(2.0 * k1) - 6.0 * exp(2.0 * k2)))};
    }
    case SystemId::kh3: {
      const T e = exp(-0.4 * (2.0 * k1 + k2));
      return {T(e * (6.0 + 2.0 * exp(2.0 * k1) - 2.0 * exp(2.0 * k2))),
              T(e * (8.0 + exp(2.0 * k1) - 6.0 * exp(2.0 * k2)))};
    }
  }
  return {};
}

/// Nodes where tanh/coth (tan/cot for kh) in the first-order pair blow up.
/// There the equation is multiplied through by the vanishing factor.
struct NodeForm {
  bool p_limit = false;  // ∂u k₄ − ∂v k₃ equation (kh only: cos k₁ = 0)
  bool q_limit = false;  // ∂v k₄ + ∂u k₃ equation (sinh k₁ or sin k₁ = 0)
  bool any() const { return p_limit || q_limit; }
};

inline constexpr double kSingularNodeFloor = 1e-8;

inline NodeForm node_form(SystemId sys, double k1) {
  NodeForm f;
  if (field_count(sys) != 4) return f;
  if (sys == SystemId::kh) {
    f.p_limit = std::abs(std::cos(k1)) < kSingularNodeFloor;
    f.q_limit = std::abs(std::sin(k1)) < kSingularNodeFloor;
  } else {
    f.q_limit = std::abs(k1) < kSingularNodeFloor;
  }
  return f;
}

/// Defects at one point. `lap` holds Δk for each field. Order: first-order
/// pair (four-field systems only), then Δk₁, Δk₂.
template <typename T>
std::vector<T> pointwise_residual(SystemId sys, const KPoint<T>& p, const std::array<T, 4>& lap, NodeForm form) {
  using std::tanh, std::tan, std::sin, std::cos;
  const std::array<T, 2> rhs = laplacian_rhs(sys, p.k);
  std::vector<T> out;
  if (field_count(sys) == 4) {
    const T &k1 = p.k[0], &k3 = p.k[2], &k4 = p.k[3];
    const T &k1u = p.ku[0], &k1v = p.kv[0];
    const T curl = p.ku[3] - p.kv[2];
    const T div = p.kv[3] + p.ku[2];
    const T cross = k3 * k1v - k4 * k1u;
    const T flux = k3 * k1u + k4 * k1v;
    if (sys == SystemId::kh) {
      out.push_back(form.p_limit ? T(cos(k1) * curl + 2.0 * sin(k1) * cross) : T(curl + 2.0 * tan(k1) * cross));
      out.push_back(form.q_limit ? T(sin(k1) * div + 2.0 * cos(k1) * flux) : T(div + 2.0 / tan(k1) * flux));
    } else {
      out.push_back(curl - 2.0 * tanh(k1) * cross);
      out.push_back(form.q_limit ? T(tanh(k1) * div + 2.0 * flux) : T(div + 2.0 / tanh(k1) * flux));
    }
  }
  out.push_back(lap[0] - rhs[0]);
  out.push_back(lap[1] - rhs[1]);
  return out;
}

template <typename T>
std::vector<T> pointwise_residual(SystemId sys, const KPoint<T>& p, const std::array<T, 4>& lap) {
  return pointwise_residual(sys, p, lap, node_form(sys, primal(p.k[0])));
}

}  // namespace slag
