// SPDX-License-Identifier: MIT
//
// The twelve explicit 4-fold constructions and the case registry.
#pragma once

#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "slag/catalog/blocks.hpp"

namespace slag {

enum class Branch {
  b2zero_a2nonzero,
  b2zero_a2zero,
  Nplus_a3zero,
  Nplus_a3nonzero,
  generic_zregular,
  generic_zsingular,
};

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::b2zero_a2nonzero: return "b2zero_a2nonzero";
    case Branch::b2zero_a2zero: return "b2zero_a2zero";
    case Branch::Nplus_a3zero: return "Nplus_a3zero";
    case Branch::Nplus_a3nonzero: return "Nplus_a3nonzero";
    case Branch::generic_zregular: return "generic_zregular";
    case Branch::generic_zsingular: return "generic_zsingular";
  }
  return "?";
}

/// Sub-branch for ε = −1, selected by the solution of X(a) = a² − 1.
enum class HyperbolicProfile { none, tanh, coth, exp };

inline const char* to_string(HyperbolicProfile p) {
  switch (p) {
    case HyperbolicProfile::none: return "none";
    case HyperbolicProfile::tanh: return "tanh";
    case HyperbolicProfile::coth: return "coth";
    case HyperbolicProfile::exp: return "exp";
  }
  return "?";
}

struct CaseId {
  std::string name;
  int epsilon = 0;
  Branch branch{};
  HyperbolicProfile profile = HyperbolicProfile::none;
  BlockKind block{};
  Box tail;  // box for the parameters not owned by the block
  int sign = 1;

  /// Throws BranchViolation when the branch does not exist for this ε.
  void validate() const {
    auto bad = [&](const char* why) { throw Error(ErrorCode::BranchViolation, name + ": " + why); };
    if (epsilon < -1 || epsilon > 1) bad("epsilon out of range");
    if (branch == Branch::b2zero_a2zero && epsilon != 0) bad("b2zero_a2zero exists only for epsilon 0");
    if (profile == HyperbolicProfile::exp && epsilon != -1) bad("horosphere profile exists only for epsilon -1");
    if ((profile != HyperbolicProfile::none) != (epsilon == -1 && branch != Branch::generic_zregular &&
                                                 branch != Branch::generic_zsingular))
      bad("profile must be given exactly for the integrable epsilon -1 branches");
  }
};

/// Registered constructions. Parameter order is always (t, s, u, v); the
/// block consumes the trailing 2 or 3 parameters.
inline const std::vector<CaseId>& case_registry() {
  static const std::vector<CaseId> cases = {
      {"T2", 0, Branch::b2zero_a2nonzero, HyperbolicProfile::none, BlockKind::legendrian_S5, {{-1.0, 0.5}, {1.0, 1.5}}},
      {"T3", 0, Branch::b2zero_a2zero, HyperbolicProfile::none, BlockKind::slag_surface_C2, {{-1.0, -1.0}, {1.0, 1.0}}},
      {"T4a", 0, Branch::Nplus_a3zero, HyperbolicProfile::none, BlockKind::slag3_C3, {{-1.0}, {1.0}}},
      {"T4b", 0, Branch::Nplus_a3nonzero, HyperbolicProfile::none, BlockKind::legendrian_S7, {{0.5}, {1.5}}},
      {"cp1", 1, Branch::b2zero_a2nonzero, HyperbolicProfile::none, BlockKind::legendrian_S5, {{0.0, 0.2}, {1.0, 1.2}}},
      {"cp2", 1, Branch::Nplus_a3nonzero, HyperbolicProfile::none, BlockKind::legendrian_S7, {{-0.6}, {0.6}}},
      {"ch1", -1, Branch::b2zero_a2nonzero, HyperbolicProfile::tanh, BlockKind::legendrian_H5, {{0.0, 0.3}, {1.0, 1.3}}},
      {"ch12", -1, Branch::b2zero_a2nonzero, HyperbolicProfile::coth, BlockKind::legendrian_S5, {{-0.5, 0.3}, {0.5, 1.3}}},
      {"ch2", -1, Branch::b2zero_a2nonzero, HyperbolicProfile::exp, BlockKind::slag_surface_C2, {{-0.5, -0.5}, {0.5, 0.5}}},
      {"ch3", -1, Branch::Nplus_a3nonzero, HyperbolicProfile::tanh, BlockKind::legendrian_H7, {{-0.5}, {0.5}}},
      {"ch32", -1, Branch::Nplus_a3nonzero, HyperbolicProfile::coth, BlockKind::legendrian_S7, {{0.3}, {1.3}}},
      {"ch4", -1, Branch::Nplus_a3nonzero, HyperbolicProfile::exp, BlockKind::slag3_C3, {{-0.5}, {0.5}}},
  };
  return cases;
}

inline const CaseId& find_case(const std::string& name) {
  for (const auto& c : case_registry())
    if (c.name == name) return c;
  throw Error(ErrorCode::Configuration, "unknown case '" + name + "'");
}

/// The block each case uses unless another is supplied.
inline BuildingBlock default_block(BlockKind kind) {
  switch (kind) {
    case BlockKind::slag_surface_C2: return holomorphic_block("u2");
    case BlockKind::legendrian_S5: return clifford_legendrian();
    case BlockKind::legendrian_H5: return equivariant_legendrian_H5();
    case BlockKind::slag3_C3: return legendrian_cone_3fold();
    case BlockKind::legendrian_S7: return clifford_join_S7();
    case BlockKind::legendrian_H7: return clifford_join_H7();
  }
  throw Error(ErrorCode::BlockMismatch, "no default block");
}

inline nlohmann::json registry_json() {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : case_registry()) {
    const BuildingBlock b = default_block(c.block);
    Box box = c.tail;
    box.lo.insert(box.lo.end(), b.domain().lo.begin(), b.domain().lo.end());
    box.hi.insert(box.hi.end(), b.domain().hi.begin(), b.domain().hi.end());
    out.push_back({{"case", c.name},
                   {"epsilon", c.epsilon},
                   {"branch", to_string(c.branch)},
                   {"profile", to_string(c.profile)},
                   {"block_kind", to_string(c.block)},
                   {"default_block", b.name},
                   {"domain", {{"lo", box.lo}, {"hi", box.hi}}}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Potential for the horosphere constructions: df = 2 Σ (x dy − y dx) on a
// Lagrangian block in ℂᵐ, integrated along axis-parallel paths.

/// Coefficients of the 1-form 2 Σ Im(z̄ dz) at a block parameter point.
inline std::vector<double> potential_form(const BuildingBlock& b, std::span<const double> q) {
  const int m = b.param_dim();
  std::vector<D1> x(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    x[static_cast<std::size_t>(k)] = D1(q[static_cast<std::size_t>(k)]);
    x[static_cast<std::size_t>(k)].d[static_cast<std::size_t>(k)] = 1.0;
  }
  const auto z = b.eval_d1(x);
  std::vector<double> w(static_cast<std::size_t>(m), 0.0);
  for (const auto& c : z)
    for (int k = 0; k < m; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      w[uk] += 2.0 * (c.re.v * c.im.d[uk] - c.im.v * c.re.d[uk]);
    }
  return w;
}

struct PotentialJet {
  double value = 0.0;
  std::array<double, 3> grad{};
  std::array<std::array<double, 3>, 3> hess{};
  double path_mismatch = 0.0;
};

namespace detail {

inline double integrate_path(const BuildingBlock& b, std::span<const double> q, const std::vector<int>& order) {
  const Box& box = b.domain();
  std::vector<double> cur(box.lo);
  double total = 0.0;
  for (int axis : order) {
    const auto ua = static_cast<std::size_t>(axis);
    const double a = cur[ua], e = q[ua];
    if (a != e) {
      auto integrand = [&](double x) {
        std::vector<double> pt = cur;
        pt[ua] = x;
        return potential_form(b, pt)[ua];
      };
      total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, e, 4, 1e-13);
    }
    cur[ua] = e;
  }
  return total;
}

}  // namespace detail

/// f with f(base corner) = 0, its gradient and Hessian, and the difference
/// between the two extreme axis orderings of the integration path.
inline PotentialJet potential_jet(const BuildingBlock& b, std::span<const double> q, double closed_tol = 1e-8) {
  const int m = b.param_dim();
  std::vector<int> fwd(static_cast<std::size_t>(m)), rev;
  for (int k = 0; k < m; ++k) fwd[static_cast<std::size_t>(k)] = k;
  rev.assign(fwd.rbegin(), fwd.rend());
  PotentialJet out;
  const double f1 = detail::integrate_path(b, q, fwd);
  const double f2 = detail::integrate_path(b, q, rev);
  out.value = f1;
  out.path_mismatch = std::abs(f1 - f2);
  if (out.path_mismatch > closed_tol)
    throw Error(ErrorCode::PotentialNotClosed, b.name + ": potential depends on the integration path");

  std::vector<Hyper> x(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) x[static_cast<std::size_t>(k)] = seed_hyper(q[static_cast<std::size_t>(k)], static_cast<std::size_t>(k));
  const auto z = b.imm.eval_hyper(x);
  for (const auto& c : z)
    for (int k = 0; k < m; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      out.grad[uk] += 2.0 * (c.re.v.v * c.im.v.d[uk] - c.im.v.v * c.re.v.d[uk]);
      for (int l = 0; l < m; ++l) {
        const auto ul = static_cast<std::size_t>(l);
        // ∂_l of 2(x ∂_k y − y ∂_k x)
        out.hess[uk][ul] += 2.0 * (c.re.v.d[ul] * c.im.v.d[uk] + c.re.v.v * c.im.d[ul].d[uk] -
                                   c.im.v.d[ul] * c.re.v.d[uk] - c.im.v.v * c.re.d[ul].d[uk]);
      }
    }
  for (int k = 0; k < m; ++k)
    for (int l = k + 1; l < m; ++l) {
      const double s = 0.5 * (out.hess[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] +
                              out.hess[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]);
      out.hess[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = s;
      out.hess[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = s;
    }
  return out;
}

/// Loop integral of the potential form around a square of side h centred at
/// q in the (a,b) parameter plane, divided by the area.
inline double potential_curl(const BuildingBlock& b, std::span<const double> q, int a, int c, double h = 1e-3) {
  using boost::math::quadrature::gauss_kronrod;
  const auto ua = static_cast<std::size_t>(a), uc = static_cast<std::size_t>(c);
  auto form_at = [&](double x, double y, std::size_t comp) {
    std::vector<double> pt(q.begin(), q.end());
    pt[ua] = x;
    pt[uc] = y;
    return potential_form(b, pt)[comp];
  };
  const double x0 = q[ua] - h / 2, x1 = q[ua] + h / 2, y0 = q[uc] - h / 2, y1 = q[uc] + h / 2;
  double loop = 0.0;
  loop += gauss_kronrod<double, 15>::integrate([&](double x) { return form_at(x, y0, ua); }, x0, x1, 0, 0);
  loop += gauss_kronrod<double, 15>::integrate([&](double y) { return form_at(x1, y, uc); }, y0, y1, 0, 0);
  loop -= gauss_kronrod<double, 15>::integrate([&](double x) { return form_at(x, y1, ua); }, x0, x1, 0, 0);
  loop -= gauss_kronrod<double, 15>::integrate([&](double y) { return form_at(x0, y, uc); }, y0, y1, 0, 0);
  return loop / (h * h);
}

// ---------------------------------------------------------------------------

/// Null-basis coordinates (z₁,z₂,z₃,z₄,z₅) with product Re(Σ₁³ z w̄ + z₄w̄₅ + z₅w̄₄)
/// to the standard ℂ⁵₁ ordering (timelike, z₁, z₂, z₃, spacelike).
template <typename T>
CxVec<T> from_null_basis(const CxVec<T>& z) {
  const double k = 1.0 / std::sqrt(2.0);
  return {(z[3] - z[4]) * k, z[0], z[1], z[2], (z[3] + z[4]) * k};
}

inline std::vector<cplx> to_null_basis(const CVector& w) {
  const double k = 1.0 / std::sqrt(2.0);
  return {w[1], w[2], w[3], (w[4] + w[0]) * k, (w[4] - w[0]) * k};
}

namespace detail {

template <typename T>
CxVec<T> tail_block(const BuildingBlock& b, std::span<const T> p, std::size_t first) {
  return b(std::span<const T>(p.data() + first, p.size() - first));
}

template <typename T>
CxVec<T> scaled(CxVec<T> z, const T& s) {
  for (auto& c : z) c = c * s;
  return z;
}

// Horosphere form: (ψ e^{-σ}, −e^{-σ}/2, (|ψ|² + i f) e^{-σ} + e^{σ}) in the null basis,
// where ψ already carries any extra real coordinate.
template <typename T>
CxVec<T> horosphere(CxVec<T> psi, const T& sigma, const T& f) {
  T n2 = T(0.0);
  for (const auto& c : psi) n2 = n2 + norm2(c);
  const T em = exp(-sigma), ep = exp(sigma);
  CxVec<T> z = scaled(std::move(psi), em);
  z.push_back(Cx<T>(T(-0.5 * em)));
  z.push_back(Cx<T>(n2 * em + ep, f * em));
  return from_null_basis(z);
}

template <typename T, std::size_t M>
T potential_node(const BuildingBlock& b, std::span<const T> q) {
  std::array<double, M> pt{}, g{};
  std::array<std::array<double, M>, M> h{};
  std::array<T, M> x{};
  for (std::size_t k = 0; k < M; ++k) {
    pt[k] = primal(q[k]);
    x[k] = q[k];
  }
  const PotentialJet pj = potential_jet(b, pt);
  for (std::size_t k = 0; k < M; ++k) {
    g[k] = pj.grad[k];
    for (std::size_t l = 0; l < M; ++l) h[k][l] = pj.hess[k][l];
  }
  return taylor2<T, M>(pj.value, g, h, x);
}

}  // namespace detail

/// Assembles the case's formula around the block. Coordinates: (t, s, u, v).
inline Immersion build_immersion(const CaseId& c, const BuildingBlock& b) {
  c.validate();
  if (b.kind != c.block)
    throw Error(ErrorCode::BlockMismatch,
                c.name + " needs a " + std::string(to_string(c.block)) + " block, got " + to_string(b.kind));
  Box box = c.tail;
  box.lo.insert(box.lo.end(), b.domain().lo.begin(), b.domain().lo.end());
  box.hi.insert(box.hi.end(), b.domain().hi.begin(), b.domain().hi.end());
  const AmbientSpace amb = c.epsilon == 0 ? AmbientSpace::flat(4)
                           : c.epsilon > 0 ? AmbientSpace::sphere(5)
                                           : AmbientSpace::hyperbolic(5);
  const LiftMode lift = lift_for_epsilon(c.epsilon);
  const std::string& n = c.name;

  auto make = [&](auto f) { return make_immersion(n, 4, amb, lift, box, f); };

  if (n == "T2")  // (t, s φ(u,v))
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      CxVec<T> z{Cx<T>(p[0])};
      for (auto& w : detail::scaled(detail::tail_block(b, p, 2), p[1])) z.push_back(w);
      return z;
    });
  if (n == "T3")  // (t, s, φ(u,v))
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      CxVec<T> z{Cx<T>(p[0]), Cx<T>(p[1])};
      for (auto& w : detail::tail_block(b, p, 2)) z.push_back(w);
      return z;
    });
  if (n == "T4a")  // (t, φ(s,u,v))
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      CxVec<T> z{Cx<T>(p[0])};
      for (auto& w : detail::tail_block(b, p, 1)) z.push_back(w);
      return z;
    });
  if (n == "T4b")  // t φ(s,u,v)
    return make([b](auto p) { return detail::scaled(detail::tail_block(b, p, 1), p[0]); });
  if (n == "cp1")  // (φ cos s, sin s cos t, sin s sin t)
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      CxVec<T> z = detail::scaled(detail::tail_block(b, p, 2), T(cos(p[1])));
      z.push_back(Cx<T>(sin(p[1]) * cos(p[0])));
      z.push_back(Cx<T>(sin(p[1]) * sin(p[0])));
      return z;
    });
  if (n == "cp2")  // (φ(s,u,v) cos t, sin t)
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      CxVec<T> z = detail::scaled(detail::tail_block(b, p, 1), T(cos(p[0])));
      z.push_back(Cx<T>(sin(p[0])));
      return z;
    });
  if (n == "ch1")  // (sin t sinh s, cos t sinh s, φ cosh s), φ's timelike slot moved first
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      const CxVec<T> phi = detail::scaled(detail::tail_block(b, p, 2), T(cosh(p[1])));
      return CxVec<T>{phi[0], Cx<T>(sin(p[0]) * sinh(p[1])), Cx<T>(cos(p[0]) * sinh(p[1])), phi[1], phi[2]};
    });
  if (n == "ch12")  // (φ sinh s, cosh t cosh s, sinh t cosh s), timelike slot first
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      const CxVec<T> phi = detail::scaled(detail::tail_block(b, p, 2), T(sinh(p[1])));
      return CxVec<T>{Cx<T>(cosh(p[0]) * cosh(p[1])), phi[0], phi[1], phi[2], Cx<T>(sinh(p[0]) * cosh(p[1]))};
    });
  if (n == "ch2")  // ((φ(u,v), t) e^{-s}, −e^{-s}/2, (|(φ,t)|² + i f) e^{-s} + e^{s})
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      std::span<const T> q(p.data() + 2, 2);
      CxVec<T> psi = b(q);
      psi.push_back(Cx<T>(p[0]));
      return detail::horosphere(std::move(psi), p[1], detail::potential_node<T, 2>(b, q));
    });
  if (n == "ch3")  // (sinh t, φ(s,u,v) cosh t), φ's timelike slot first
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      const CxVec<T> phi = detail::scaled(detail::tail_block(b, p, 1), T(cosh(p[0])));
      return CxVec<T>{phi[0], Cx<T>(sinh(p[0])), phi[1], phi[2], phi[3]};
    });
  if (n == "ch32")  // (φ(s,u,v) sinh t, cosh t), timelike slot first
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      CxVec<T> z{Cx<T>(cosh(p[0]))};
      for (auto& w : detail::scaled(detail::tail_block(b, p, 1), T(sinh(p[0])))) z.push_back(w);
      return z;
    });
  if (n == "ch4")  // (φ e^{-t}, −e^{-t}/2, (|φ|² + i f) e^{-t} + e^{t})
    return make([b](auto p) {
      using T = typename decltype(p)::value_type;
      std::span<const T> q(p.data() + 1, 3);
      return detail::horosphere(b(q), p[0], detail::potential_node<T, 3>(b, q));
    });
  throw Error(ErrorCode::Configuration, "case '" + n + "' has no construction");
}

}  // namespace slag
