// SPDX-License-Identifier: MIT
//
// Frame data along a coordinate patch: the orthonormal frame X₁…X₄ in
// coordinates, its connection table and the cubic form in that frame. The
// moving-frame equations only ever see this triple, so the same integrator
// runs on k-field closed forms, on exact catalog jets and on the flat model.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <sstream>
#include <string>

#include "slag/ambient.hpp"
#include "slag/cubic.hpp"
#include "slag/dual.hpp"
#include "slag/error.hpp"
#include "slag/immersion.hpp"
#include "slag/kfield/fields.hpp"
#include "slag/kfield/grid.hpp"
#include "slag/structure/equations.hpp"

namespace slag {

using Point4 = std::array<double, 4>;
using StateMatrix = Eigen::Matrix<cplx, 5, 5>;

struct FrameData {
  Eigen::Matrix4d frame;  // columns X₁…X₄ in coordinate components
  ConnectionArray gamma{};  // ∇_{X_i}X_j = Σ_k gamma[i][j][k] X_k
  CubicTensor cubic{4};     // C(X_i, X_j, X_k)
};

/// Frame data as a function of the coordinate point. `quantum[a] > 0` means
/// the data only exists on the lattice quantum[a]·ℤ along axis a.
struct FrameModel {
  std::string name;
  AmbientSpace ambient;
  std::function<FrameData(const Point4&)> data;
  std::array<double, 4> quantum{0.0, 0.0, 0.0, 0.0};
};

inline constexpr double kGaugeFloor = 1e-10;

/// Derivative along coordinate axis `axis` of the stacked state (F, X₁…X₄):
/// d/dx_a S = K S, with
///   D F   = Σ_i w_i X_i,
///   D X_j = Σ_i w_i (Σ_k Γ_ij^k X_k + J Σ_k C_ijk X_k) − ε w_j F,
/// where ∂_a = Σ_i w_i X_i.
inline StateMatrix assemble_rhs(const FrameData& d, int epsilon, int axis) {
  if (axis < 0 || axis > 3) throw Error(ErrorCode::Configuration, "direction must be one of t, s, u, v");
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(d.frame);
  if (!lu.isInvertible() || std::abs(d.frame.determinant()) < kGaugeFloor)
    throw Error(ErrorCode::SingularGauge, "coordinate frame is singular");
  const Eigen::Vector4d w = lu.solve(Eigen::Vector4d::Unit(axis));
  StateMatrix k = StateMatrix::Zero();
  for (int i = 0; i < 4; ++i) k(0, 1 + i) = w(i);
  for (int j = 0; j < 4; ++j) {
    k(1 + j, 0) = -static_cast<double>(epsilon) * w(j);
    for (int kk = 0; kk < 4; ++kk) {
      cplx c{0.0, 0.0};
      for (int i = 0; i < 4; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        c += w(i) * cplx(d.gamma[ui][static_cast<std::size_t>(j)][static_cast<std::size_t>(kk)], d.cubic(i, j, kk));
      }
      k(1 + j, 1 + kk) = c;
    }
  }
  return k;
}

// ---- generic branch --------------------------------------------------------

/// Coordinate frame (t, s, u, v) of the generic branch from the gauge fields:
/// X₄ = ∂t, μX₃ = σ∂s, X₁ + iX₂ = (∂u + i∂v)/ρ − σγ₁∂s − γ₂∂t.
inline FrameData generic_frame_data(SystemId sys, const FrameCoefficients& c, const GaugeFields& g) {
  if (!(std::abs(g.mu) > kGaugeFloor) || !(std::abs(g.rho) > kGaugeFloor))
    throw Error(ErrorCode::SingularGauge, "gauge degenerates: |mu| or |rho| below " + std::to_string(kGaugeFloor));
  const double sig = system_epsilon(sys) == 0 ? -1.0 : 1.0;
  const cplx inv_rho = 1.0 / g.rho;
  FrameData d;
  d.frame.col(0) << -g.gamma2.real(), -sig * g.gamma1.real(), inv_rho.real(), -inv_rho.imag();
  d.frame.col(1) << -g.gamma2.imag(), -sig * g.gamma1.imag(), inv_rho.imag(), inv_rho.real();
  d.frame.col(2) << 0.0, sig / g.mu, 0.0, 0.0;
  d.frame.col(3) << 1.0, 0.0, 0.0, 0.0;
  d.gamma = connection_general(c);
  d.cubic = canonical_pattern(c.r, 4);
  return d;
}

inline StateMatrix assemble_rhs(SystemId sys, const FrameCoefficients& c, const GaugeFields& g, int axis) {
  return assemble_rhs(generic_frame_data(sys, c, g), system_epsilon(sys), axis);
}

/// k-values with first derivatives at a (u, v) point.
struct KSource {
  SystemId system = SystemId::cpk2;
  int sign = 1;
  std::function<KPoint<double>(double, double)> at;
  double hu = 0.0, hv = 0.0;  // lattice spacing, 0 when defined everywhere
};

inline KSource constant_source(SystemId sys, const std::array<double, 4>& k, int sign = 1) {
  KSource src;
  src.system = sys;
  src.sign = sign;
  src.at = [k](double, double) {
    KPoint<double> p;
    p.k = k;
    return p;
  };
  return src;
}

/// Samples the fields at nodes only, with the solver's central differences.
inline KSource grid_source(const KFields& f, int sign = 1) {
  auto held = std::make_shared<const KFields>(f);
  KSource src;
  src.system = f.system;
  src.sign = sign;
  src.hu = f.hu;
  src.hv = f.hv;
  src.at = [held](double u, double v) {
    const KFields& g = *held;
    auto node = [](double x, double h, int n, bool periodic, const char* axis) {
      const double q = x / h;
      const long i = std::lround(q);
      if (std::abs(q - static_cast<double>(i)) > 1e-7) {
        std::ostringstream os;
        os << "k-fields sampled off the grid: " << axis << " = " << x << " is not a node";
        throw Error(ErrorCode::Configuration, os.str());
      }
      if (periodic) return static_cast<int>(((i % n) + n) % n);
      if (i < 0 || i >= n) {
        std::ostringstream os;
        os << "k-fields sampled outside the grid: " << axis << " = " << x;
        throw Error(ErrorCode::DomainViolation, os.str());
      }
      return static_cast<int>(i);
    };
    const bool per = g.bc == Boundary::periodic;
    return point_of(fd_jet(g, node(u, g.hu, g.nu, per, "u"), node(v, g.hv, g.nv, per, "v")));
  };
  return src;
}

inline AmbientSpace ambient_for_epsilon(int epsilon) {
  return epsilon == 0 ? AmbientSpace::flat(4) : epsilon > 0 ? AmbientSpace::sphere(5) : AmbientSpace::hyperbolic(5);
}

/// Generic-branch model in coordinates (t, s, u, v).
inline FrameModel generic_model(const KSource& src) {
  FrameModel m;
  m.name = to_string(src.system);
  m.ambient = ambient_for_epsilon(system_epsilon(src.system));
  m.quantum = {0.0, 0.0, src.hu, src.hv};
  m.data = [src](const Point4& p) {
    const ClosedForm<double> cf = closed_form(src.system, src.at(p[2], p[3]), p[1], p[0], src.sign);
    return generic_frame_data(src.system, to_coefficients(cf), to_gauge(cf));
  };
  return m;
}

// ---- frame data from an exact immersion -------------------------------------

namespace detail {

using G4 = Dual<double, 4>;

// Gram–Schmidt frame (coordinate order) with exact first derivatives, from a
// second-order jet: ∂_c g_ab = ⟨F_ac, F_b⟩ + ⟨F_a, F_bc⟩.
inline std::array<std::array<G4, 4>, 4> gram_schmidt_frame(const Jet2& jet) {
  std::array<std::array<G4, 4>, 4> g;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      G4 e(real_product(jet.d1[static_cast<std::size_t>(a)], jet.d1[static_cast<std::size_t>(b)]));
      for (int c = 0; c < 4; ++c)
        e.d[static_cast<std::size_t>(c)] = real_product(jet.d2(a, c), jet.d1[static_cast<std::size_t>(b)]) +
                                           real_product(jet.d1[static_cast<std::size_t>(a)], jet.d2(b, c));
      g[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = e;
    }
  auto dot = [&](const std::array<G4, 4>& x, const std::array<G4, 4>& y) {
    G4 s(0.0);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) s += x[a] * g[a][b] * y[b];
    return s;
  };
  std::array<std::array<G4, 4>, 4> e;  // e[i][a]: component a of X_i
  for (std::size_t i = 0; i < 4; ++i) {
    std::array<G4, 4> v{};
    for (std::size_t a = 0; a < 4; ++a) v[a] = G4(a == i ? 1.0 : 0.0);
    for (std::size_t j = 0; j < i; ++j) {
      const G4 p = dot(v, e[j]);
      for (std::size_t a = 0; a < 4; ++a) v[a] -= p * e[j][a];
    }
    const G4 nrm2 = dot(v, v);
    if (!(nrm2.v > 1e-24)) throw Error(ErrorCode::DegenerateMetric, "coordinate vectors are dependent");
    const G4 nrm = sqrt(nrm2);
    for (std::size_t a = 0; a < 4; ++a) e[i][a] = v[a] / nrm;
  }
  return e;
}

}  // namespace detail

/// Frame data of an immersion at a point: Gram–Schmidt frame of the
/// coordinate vectors, with Γ and C read off D_{X_i}F_*X_j exactly.
inline FrameData immersion_frame_data(const Immersion& imm, const Point4& p) {
  if (imm.param_dim != 4) throw Error(ErrorCode::DimensionMismatch, imm.name + ": frame data needs 4 parameters");
  const Jet2 jet = evaluate_jet(imm, p);
  const auto e = detail::gram_schmidt_frame(jet);
  const std::size_t m = jet.value.size();
  FrameData out;
  std::array<CVector, 4> push;  // F_*X_i
  for (std::size_t i = 0; i < 4; ++i) {
    push[i] = CVector{std::vector<cplx>(m), jet.value.signature_index};
    for (std::size_t a = 0; a < 4; ++a) {
      out.frame(static_cast<int>(a), static_cast<int>(i)) = e[i][a].v;
      push[i] = push[i] + e[i][a].v * jet.d1[a];
    }
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      // D_{X_i}(F_*X_j) = Σ_b E_bi Σ_a (∂_b E_aj F_a + E_aj F_ab)
      CVector dd{std::vector<cplx>(m), jet.value.signature_index};
      for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t a = 0; a < 4; ++a)
          dd = dd + e[i][b].v * (e[j][a].d[b] * jet.d1[a] + e[j][a].v * jet.d2(static_cast<int>(a), static_cast<int>(b)));
      for (std::size_t k = 0; k < 4; ++k) {
        out.gamma[i][j][k] = real_product(dd, push[k]);
        out.cubic.at(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)) =
            real_product(dd, apply_J(push[k]));
      }
    }
  return out;
}

inline FrameModel immersion_model(const Immersion& imm) {
  FrameModel m;
  m.name = imm.name;
  m.ambient = imm.ambient;
  m.data = [imm](const Point4& p) { return immersion_frame_data(imm, p); };
  return m;
}

/// A ≡ 0, ∇ ≡ 0, coordinates orthonormal: the integral is an affine 4-plane.
inline FrameModel flat_model() {
  FrameModel m;
  m.name = "flat";
  m.ambient = AmbientSpace::flat(4);
  m.data = [](const Point4&) {
    FrameData d;
    d.frame.setIdentity();
    return d;
  };
  return m;
}

}  // namespace slag
