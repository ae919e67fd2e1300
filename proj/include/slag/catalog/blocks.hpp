// SPDX-License-Identifier: MIT
//
// Lower-dimensional special Lagrangian / Legendrian pieces that the 4-fold
// constructions are assembled from.
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>

#include "slag/immersion.hpp"

namespace slag {

enum class BlockKind { slag_surface_C2, legendrian_S5, legendrian_H5, slag3_C3, legendrian_S7, legendrian_H7 };

inline const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::slag_surface_C2: return "slag_surface_C2";
    case BlockKind::legendrian_S5: return "legendrian_S5";
    case BlockKind::legendrian_H5: return "legendrian_H5";
    case BlockKind::slag3_C3: return "slag3_C3";
    case BlockKind::legendrian_S7: return "legendrian_S7";
    case BlockKind::legendrian_H7: return "legendrian_H7";
  }
  return "?";
}

inline int block_param_dim(BlockKind k) {
  return (k == BlockKind::slag3_C3 || k == BlockKind::legendrian_S7 || k == BlockKind::legendrian_H7) ? 3 : 2;
}

inline AmbientSpace block_ambient(BlockKind k) {
  switch (k) {
    case BlockKind::slag_surface_C2: return AmbientSpace::flat(2);
    case BlockKind::legendrian_S5: return AmbientSpace::sphere(3);
    case BlockKind::legendrian_H5: return AmbientSpace::hyperbolic(3);
    case BlockKind::slag3_C3: return AmbientSpace::flat(3);
    case BlockKind::legendrian_S7: return AmbientSpace::sphere(4);
    case BlockKind::legendrian_H7: return AmbientSpace::hyperbolic(4);
  }
  return {};
}

using D1 = Dual<double, 4>;

struct BuildingBlock {
  BlockKind kind{};
  std::string name;
  bool degenerate = false;  // cubic form vanishes identically (totally geodesic)
  Immersion imm;
  std::function<CxVec<D1>(std::span<const D1>)> eval_d1;

  int param_dim() const { return imm.param_dim; }
  const Box& domain() const { return imm.domain; }

  template <typename T>
  CxVec<T> operator()(std::span<const T> p) const {
    if constexpr (std::is_same_v<T, D1>) {
      return eval_d1(p);
    } else {
      return imm(p);
    }
  }
};

template <typename F>
BuildingBlock make_block(BlockKind kind, std::string name, Box domain, F f, bool degenerate = false) {
  BuildingBlock b;
  b.kind = kind;
  b.name = name;
  b.degenerate = degenerate;
  b.imm = make_immersion(std::move(name), block_param_dim(kind), block_ambient(kind),
                         lift_for_epsilon(block_ambient(kind).epsilon), std::move(domain), f);
  b.eval_d1 = [f](std::span<const D1> p) { return f(p); };
  return b;
}

template <typename T>
CxVec<T> clifford_point(const T& u, const T& v) {
  const double k = 1.0 / std::sqrt(3.0);
  return {expi(u) * k, expi(v) * k, expi(T(-(u + v))) * k};
}

/// φ(u,v) = 3^{-1/2}(e^{iu}, e^{iv}, e^{-i(u+v)}) in S⁵.
inline BuildingBlock clifford_legendrian() {
  return make_block(BlockKind::legendrian_S5, "clifford", Box{{0.0, 0.0}, {1.0, 1.0}}, [](auto p) {
    return clifford_point(p[0], p[1]);
  });
}

/// s·φ(u,v), the cone over the Clifford torus, in ℂ³.
inline BuildingBlock legendrian_cone_3fold() {
  return make_block(BlockKind::slag3_C3, "clifford_cone", Box{{0.5, 0.0, 0.0}, {1.5, 1.0, 1.0}}, [](auto p) {
    using T = typename decltype(p)::value_type;
    auto z = clifford_point(p[1], p[2]);
    for (auto& c : z) c = c * T(p[0]);
    return z;
  });
}

/// (φ(u,v) cos s, sin s) in S⁷: the spherical join of the Clifford torus with a point.
inline BuildingBlock clifford_join_S7() {
  return make_block(BlockKind::legendrian_S7, "clifford_join", Box{{0.2, 0.0, 0.0}, {1.2, 1.0, 1.0}}, [](auto p) {
    using T = typename decltype(p)::value_type;
    auto z = clifford_point(p[1], p[2]);
    for (auto& c : z) c = c * T(cos(p[0]));
    z.push_back(Cx<T>(sin(p[0])));
    return z;
  });
}

/// (cosh s, φ(u,v) sinh s) in H⁷, first coordinate timelike.
inline BuildingBlock clifford_join_H7() {
  return make_block(BlockKind::legendrian_H7, "clifford_join_h", Box{{0.3, 0.0, 0.0}, {1.3, 1.0, 1.0}}, [](auto p) {
    using T = typename decltype(p)::value_type;
    CxVec<T> z{Cx<T>(cosh(p[0]))};
    for (auto& c : clifford_point(p[1], p[2])) z.push_back(c * T(sinh(p[0])));
    return z;
  });
}

namespace detail {

// β'(ρ) for the SO(2)-equivariant H⁵ block with invariant c.
template <typename T>
T h5_phase_rate(const T& rho, double c) {
  const T ch = cosh(rho), sh = sinh(rho);
  return -c / (tanh(rho) * sqrt(ch * ch * sh * sh * sh * sh - c * c));
}

}  // namespace detail

/// SO(2)-equivariant minimal Legendrian in H⁵ (first coordinate timelike):
///   (cosh ρ e^{iα}, sinh ρ e^{iβ} cos t, sinh ρ e^{iβ} sin t)
/// with sin ψ = c/(cosh ρ sinh²ρ), α = ψ − 2β and β' = h5_phase_rate.
/// β has no closed form; it is integrated from ρ₀ and enters the jet as a
/// second-order Taylor node. Valid away from the turning point where
/// cosh ρ sinh²ρ = c.
inline BuildingBlock equivariant_legendrian_H5(double c = 1.0, double rho0 = 1.0) {
  auto f = [c, rho0](auto p) {
    using T = typename decltype(p)::value_type;
    const double r = primal(p[0]);
    const double beta0 = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [c](double x) { return detail::h5_phase_rate(x, c); }, rho0, r, 5, 1e-14);
    Dual<double, 1> rd(r, {1.0});
    const Dual<double, 1> rate = detail::h5_phase_rate(rd, c);
    const T beta = taylor2<T, 1>(beta0, {rate.v}, {{{rate.d[0]}}}, {p[0]});
    const T ch = cosh(p[0]), sh = sinh(p[0]);
    const T psi = asin(c / (ch * sh * sh));
    const T alpha = psi - 2.0 * beta;
    const Cx<T> w = expi(beta) * sh;
    return CxVec<T>{expi(alpha) * ch, w * T(cos(p[1])), w * T(sin(p[1]))};
  };
  return make_block(BlockKind::legendrian_H5, "equivariant_h5", Box{{1.0, 0.0}, {1.6, 1.0}}, f);
}

/// The totally geodesic real hyperbolic plane in H⁵; cubic form ≡ 0.
inline BuildingBlock geodesic_legendrian_H5() {
  return make_block(
      BlockKind::legendrian_H5, "geodesic_h5", Box{{0.3, 0.0}, {1.3, 1.0}},
      [](auto p) {
        using T = typename decltype(p)::value_type;
        return CxVec<T>{Cx<T>(cosh(p[0])), Cx<T>(sinh(p[0]) * cos(p[1])), Cx<T>(sinh(p[0]) * sin(p[1]))};
      },
      true);
}

/// Special Lagrangian surface in ℂ² from a holomorphic curve v = f(u):
/// (x₁+iy₁, x₂+iy₂) with x₁ = Re u, x₂ = −Im u, y₁ = Re f, y₂ = Im f.
/// `f` is a generic callable on Cx<T>.
template <typename F>
BuildingBlock holomorphic_to_slag(std::string name, F f, Box domain = Box{{0.2, 0.1}, {1.0, 0.9}}) {
  return make_block(BlockKind::slag_surface_C2, std::move(name), std::move(domain), [f](auto p) {
    using T = typename decltype(p)::value_type;
    const Cx<T> u{p[0], p[1]};
    const Cx<T> w = f(u);
    return CxVec<T>{Cx<T>(u.re, w.re), Cx<T>(T(-u.im), w.im)};
  });
}

/// Named holomorphic curves: "u", "u2", "exp", "const".
inline BuildingBlock holomorphic_block(const std::string& which) {
  if (which == "u") return holomorphic_to_slag("holo_u", [](const auto& u) { return u; });
  if (which == "u2") return holomorphic_to_slag("holo_u2", [](const auto& u) { return u * u; });
  if (which == "exp") return holomorphic_to_slag("holo_exp", [](const auto& u) { return exp(u); });
  if (which == "const")
    return holomorphic_to_slag("holo_const", [](const auto& u) {
      using C = std::decay_t<decltype(u)>;
      return C(0.5, 0.25) + 0.0 * u;
    });
  throw Error(ErrorCode::Configuration, "unknown holomorphic curve '" + which + "'");
}

/// A complex line, (u + iv, 0): not Lagrangian. Used to exercise failure paths.
inline BuildingBlock decoy_block() {
  return make_block(BlockKind::slag_surface_C2, "decoy_complex_line", Box{{0.0, 0.0}, {1.0, 1.0}}, [](auto p) {
    using T = typename decltype(p)::value_type;
    return CxVec<T>{Cx<T>(p[0], p[1]), Cx<T>(T(0.0))};
  });
}

}  // namespace slag
