// SPDX-License-Identifier: MIT
//
// Immersions as closed-form maps from a parameter box into ℂⁿ / ℂⁿ₁, and their
// exact second-order jets.
#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slag/ambient.hpp"
#include "slag/complex.hpp"
#include "slag/dual.hpp"
#include "slag/error.hpp"

namespace slag {

enum class LiftMode { none, sphere, hyperbolic };

inline const char* to_string(LiftMode m) {
  switch (m) {
    case LiftMode::none: return "none";
    case LiftMode::sphere: return "sphere";
    case LiftMode::hyperbolic: return "hyperbolic";
  }
  return "?";
}

inline LiftMode lift_for_epsilon(int epsilon) {
  return epsilon > 0 ? LiftMode::sphere : (epsilon < 0 ? LiftMode::hyperbolic : LiftMode::none);
}

/// Open parameter box lo < x < hi (closed at the boundary for sampling).
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(std::span<const double> p, double slack = 1e-12) const {
    if (p.size() != lo.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    return true;
  }
  /// Node k of a uniform grid with n points per axis, row-major with axis 0 fastest.
  std::vector<double> grid_point(std::size_t k, int n) const {
    std::vector<double> p(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
      const std::size_t ia = k % static_cast<std::size_t>(n);
      k /= static_cast<std::size_t>(n);
      p[a] = n == 1 ? 0.5 * (lo[a] + hi[a]) : lo[a] + (hi[a] - lo[a]) * double(ia) / double(n - 1);
    }
    return p;
  }
  std::size_t grid_size(int n) const {
    std::size_t s = 1;
    for (std::size_t a = 0; a < dim(); ++a) s *= static_cast<std::size_t>(n);
    return s;
  }
};

template <typename T>
using CxVec = std::vector<Cx<T>>;

/// Throws SingularPoint when a formula's denominator is numerically zero.
template <typename T>
const T& guard(const T& denominator, const char* where) {
  if (std::abs(primal(denominator)) < 1e-12) throw Error(ErrorCode::SingularPoint, where);
  return denominator;
}

struct Immersion {
  std::string name;
  int param_dim = 4;
  AmbientSpace ambient;
  LiftMode lift = LiftMode::none;
  Box domain;
  std::function<CxVec<Hyper>(std::span<const Hyper>)> eval_hyper;
  std::function<CxVec<double>(std::span<const double>)> eval_value;

  template <typename T>
  CxVec<T> operator()(std::span<const T> p) const {
    if constexpr (std::is_same_v<T, double>) {
      return eval_value(p);
    } else {
      return eval_hyper(p);
    }
  }

  CVector value(std::span<const double> p) const {
    CVector out;
    out.signature_index = ambient.signature_index;
    for (const auto& c : eval_value(p)) out.z.push_back({c.re, c.im});
    return out;
  }
};

/// Wrap a generic callable `f(std::span<const T>) -> CxVec<T>` for both scalar types.
template <typename F>
Immersion make_immersion(std::string name, int param_dim, AmbientSpace ambient, LiftMode lift, Box domain,
                         F f) {
  Immersion imm;
  imm.name = std::move(name);
  imm.param_dim = param_dim;
  imm.ambient = ambient;
  imm.lift = lift;
  imm.domain = std::move(domain);
  imm.eval_hyper = [f](std::span<const Hyper> p) { return f(p); };
  imm.eval_value = [f](std::span<const double> p) { return f(p); };
  return imm;
}

/// Value, first and second partials of an immersion at one point. The
/// Hessian is stored once (upper triangle) so d2(i,j) = d2(j,i) exactly.
struct Jet2 {
  int n = 0;
  CVector value;
  std::vector<CVector> d1;
  std::vector<CVector> d2_packed;

  static std::size_t packed_index(int i, int j, int n) {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(i * n - i * (i - 1) / 2 + (j - i));
  }
  const CVector& d2(int i, int j) const { return d2_packed[packed_index(i, j, n)]; }
  CVector& d2(int i, int j) { return d2_packed[packed_index(i, j, n)]; }

  static Jet2 zeros(int n, std::size_t m, int signature) {
    Jet2 j;
    j.n = n;
    CVector zero{std::vector<cplx>(m), signature};
    j.value = zero;
    j.d1.assign(static_cast<std::size_t>(n), zero);
    j.d2_packed.assign(static_cast<std::size_t>(n * (n + 1) / 2), zero);
    return j;
  }
};

inline void check_domain(const Immersion& imm, std::span<const double> point) {
  if (static_cast<int>(point.size()) != imm.param_dim)
    throw Error(ErrorCode::DimensionMismatch, imm.name + ": wrong number of parameters");
  if (!imm.domain.contains(point)) throw Error(ErrorCode::DomainViolation, imm.name + ": point outside domain");
}

/// Exact jet by nested dual evaluation.
inline Jet2 evaluate_jet(const Immersion& imm, std::span<const double> point) {
  check_domain(imm, point);
  const int n = imm.param_dim;
  std::vector<Hyper> p(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) p[static_cast<std::size_t>(k)] = seed_hyper(point[static_cast<std::size_t>(k)], static_cast<std::size_t>(k));
  const auto out = imm.eval_hyper(p);
  Jet2 jet = Jet2::zeros(n, out.size(), imm.ambient.signature_index);
  for (std::size_t c = 0; c < out.size(); ++c) {
    const auto& re = out[c].re;
    const auto& im = out[c].im;
    jet.value[c] = {re.v.v, im.v.v};
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      jet.d1[ui][c] = {re.v.d[ui], im.v.d[ui]};
      for (int j = i; j < n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        // Both orderings are computed; average to make the symmetry exact.
        const double r2 = 0.5 * (re.d[ui].d[uj] + re.d[uj].d[ui]);
        const double i2 = 0.5 * (im.d[ui].d[uj] + im.d[uj].d[ui]);
        jet.d2(i, j)[c] = {r2, i2};
      }
    }
  }
  auto finite = [](const CVector& v) {
    for (const auto& c : v.z)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
  };
  bool ok = finite(jet.value);
  for (const auto& v : jet.d1) ok = ok && finite(v);
  for (const auto& v : jet.d2_packed) ok = ok && finite(v);
  if (!ok) throw Error(ErrorCode::SingularPoint, imm.name + ": non-finite jet");
  return jet;
}

/// Central finite-difference jet with step h; a cross-check for evaluate_jet.
inline Jet2 fd_jet(const Immersion& imm, std::span<const double> point, double h = 1e-4) {
  check_domain(imm, point);
  const int n = imm.param_dim;
  std::vector<double> q(point.begin(), point.end());
  auto at = [&](int i, double di, int j, double dj) {
    auto r = q;
    if (i >= 0) r[static_cast<std::size_t>(i)] += di;
    if (j >= 0) r[static_cast<std::size_t>(j)] += dj;
    return imm.value(r);
  };
  const CVector f0 = imm.value(q);
  Jet2 jet = Jet2::zeros(n, f0.size(), imm.ambient.signature_index);
  jet.value = f0;
  for (int i = 0; i < n; ++i) {
    const CVector fp = at(i, h, -1, 0), fm = at(i, -h, -1, 0);
    jet.d1[static_cast<std::size_t>(i)] = (0.5 / h) * (fp - fm);
    jet.d2(i, i) = (1.0 / (h * h)) * (fp - 2.0 * f0 + fm);
    for (int j = i + 1; j < n; ++j) {
      jet.d2(i, j) = (0.25 / (h * h)) * (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h));
    }
  }
  return jet;
}

}  // namespace slag
