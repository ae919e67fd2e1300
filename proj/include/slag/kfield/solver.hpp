// SPDX-License-Identifier: MIT
//
// Discrete k-field systems: residual on the grid (5-point Laplacian, central
// first derivatives), damped Newton with a Jacobian assembled from dual
// numbers over each node's stencil, constant solutions, degeneracy scan.
#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slag/dual.hpp"
#include "slag/error.hpp"
#include "slag/kfield/grid.hpp"
#include "slag/kfield/pde.hpp"
#include "slag/parallel.hpp"

namespace slag {

// ---- residual --------------------------------------------------------------

struct ResidualGrid {
  SystemId system = SystemId::cpk2;
  int nu = 0, nv = 0;
  std::vector<std::string> labels;
  std::vector<double> values;         // node-major, labels.size() per node
  std::vector<std::size_t> limit_nodes;  // nodes evaluated in the multiplied-through form

  std::size_t equations() const { return labels.size(); }
  double at(std::size_t node, std::size_t eq) const { return values[node * equations() + eq]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : values) m = std::max(m, std::abs(x));
    return m;
  }
  /// (node, equation) of the largest |entry|; (0, 0) on an all-zero grid.
  std::pair<std::size_t, std::size_t> argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
      if (std::abs(values[i]) > std::abs(values[best])) best = i;
    const std::size_t n = equations() == 0 ? 1 : equations();
    return {best / n, best % n};
  }
};

namespace detail {

// Stencil slots: centre, east, west, north, south.
enum Slot { C = 0, E = 1, W = 2, N = 3, S = 4 };

template <typename T>
std::vector<T> stencil_residual(SystemId sys, const std::array<std::array<T, 4>, 5>& v, double hu, double hv,
                                NodeForm form) {
  KPoint<T> p;
  std::array<T, 4> lap;
  for (std::size_t m = 0; m < 4; ++m) {
    p.k[m] = v[C][m];
    p.ku[m] = (v[E][m] - v[W][m]) / (2.0 * hu);
    p.kv[m] = (v[N][m] - v[S][m]) / (2.0 * hv);
    lap[m] = (v[E][m] - 2.0 * v[C][m] + v[W][m]) / (hu * hu) + (v[N][m] - 2.0 * v[C][m] + v[S][m]) / (hv * hv);
  }
  return pointwise_residual(sys, p, lap, form);
}

// Node indices of the stencil around (i, j).
inline std::array<std::size_t, 5> stencil_nodes(const KFields& f, int i, int j) {
  return {f.index(i, j), f.index(f.wrap_u(i + 1), j), f.index(f.wrap_u(i - 1), j), f.index(i, f.wrap_v(j + 1)),
          f.index(i, f.wrap_v(j - 1))};
}

inline std::array<std::array<double, 4>, 5> stencil_values(const KFields& f, const std::array<std::size_t, 5>& nodes) {
  std::array<std::array<double, 4>, 5> v{};
  for (std::size_t s = 0; s < 5; ++s)
    for (std::size_t m = 0; m < 4; ++m) v[s][m] = f.k[m][nodes[s]];
  return v;
}

inline bool evaluated(const KFields& f, int i, int j) { return !f.on_boundary(i, j); }

inline void require_grid(const KFields& f) {
  if (f.nu < 5 || f.nv < 5) throw Error(ErrorCode::Configuration, "k-field grid must be at least 5x5");
  if (!(f.hu > 0.0) || !(f.hv > 0.0)) throw Error(ErrorCode::Configuration, "grid spacings must be positive");
}

}  // namespace detail

/// Per-node defects of the system. Dirichlet boundary nodes carry zeros.
inline ResidualGrid constraint_residual(const KFields& f) {
  detail::require_grid(f);
  ResidualGrid out;
  out.system = f.system;
  out.nu = f.nu;
  out.nv = f.nv;
  out.labels = pde_labels(f.system);
  const std::size_t neq = out.labels.size();
  out.values.assign(f.nodes() * neq, 0.0);
  for (int j = 0; j < f.nv; ++j)
    for (int i = 0; i < f.nu; ++i) {
      if (!detail::evaluated(f, i, j)) continue;
      const auto nodes = detail::stencil_nodes(f, i, j);
      const NodeForm form = node_form(f.system, f.k[0][nodes[0]]);
      if (form.any()) out.limit_nodes.push_back(nodes[0]);
      const std::vector<double> r =
          detail::stencil_residual(f.system, detail::stencil_values(f, nodes), f.hu, f.hv, form);
      std::copy(r.begin(), r.end(), out.values.begin() + static_cast<std::ptrdiff_t>(nodes[0] * neq));
    }
  return out;
}

// ---- Jacobian ---------------------------------------------------------------

/// Unknowns: the first field_count(system) fields at every non-boundary node,
/// ordered node-major.
struct UnknownMap {
  std::vector<long> slot;  // per node: first unknown index, −1 when fixed
  std::size_t count = 0;
  int fields = 0;
};

inline UnknownMap unknown_map(const KFields& f) {
  UnknownMap m;
  m.fields = field_count(f.system);
  m.slot.assign(f.nodes(), -1);
  for (int j = 0; j < f.nv; ++j)
    for (int i = 0; i < f.nu; ++i)
      if (detail::evaluated(f, i, j)) {
        m.slot[f.index(i, j)] = static_cast<long>(m.count);
        m.count += static_cast<std::size_t>(m.fields);
      }
  return m;
}

struct Linearization {
  Eigen::VectorXd residual;
  Eigen::SparseMatrix<double> jacobian;
  std::vector<std::size_t> limit_nodes;
};

/// Residual vector and its exact Jacobian with respect to the unknowns.
inline Linearization linearize(const KFields& f, const UnknownMap& map) {
  detail::require_grid(f);
  using D = Dual<double, 20>;
  struct Local {
    std::vector<Eigen::Triplet<double>> entries;
    std::vector<double> residual;
    bool limit = false;
    bool finite = true;
  };
  const std::size_t nf = static_cast<std::size_t>(map.fields);
  auto node_work = [&](std::size_t node) {
    Local loc;
    const int i = static_cast<int>(node % f.nu), j = static_cast<int>(node / f.nu);
    if (map.slot[node] < 0) return loc;
    const auto nodes = detail::stencil_nodes(f, i, j);
    const auto vals = detail::stencil_values(f, nodes);
    std::array<std::array<D, 4>, 5> dv;
    for (std::size_t s = 0; s < 5; ++s)
      for (std::size_t m = 0; m < 4; ++m) {
        dv[s][m] = D(vals[s][m]);
        dv[s][m].d[s * 4 + m] = 1.0;
      }
    const NodeForm form = node_form(f.system, vals[0][0]);
    loc.limit = form.any();
    const std::vector<D> r = detail::stencil_residual(f.system, dv, f.hu, f.hv, form);
    const long row0 = map.slot[node];
    for (std::size_t e = 0; e < r.size(); ++e) {
      loc.residual.push_back(r[e].v);
      if (!std::isfinite(r[e].v)) loc.finite = false;
      // Periodic wrap on tiny grids can map two slots to the same node; the
      // triplet sum then adds their contributions.
      for (std::size_t s = 0; s < 5; ++s) {
        const long col0 = map.slot[nodes[s]];
        if (col0 < 0) continue;
        for (std::size_t m = 0; m < nf; ++m) {
          const double d = r[e].d[s * 4 + m];
          if (!std::isfinite(d)) loc.finite = false;
          if (d != 0.0) loc.entries.emplace_back(static_cast<int>(row0 + static_cast<long>(e)),
                                                 static_cast<int>(col0 + static_cast<long>(m)), d);
        }
      }
    }
    return loc;
  };
  const std::vector<Local> parts = parallel_map<Local>(f.nodes(), node_work);

  Linearization lin;
  lin.residual.resize(static_cast<Eigen::Index>(map.count));
  std::vector<Eigen::Triplet<double>> all;
  for (std::size_t node = 0; node < parts.size(); ++node) {
    const Local& p = parts[node];
    if (map.slot[node] < 0) continue;
    if (!p.finite) {
      std::ostringstream os;
      os << "non-finite Jacobian entry at node (" << node % f.nu << ", " << node / f.nu << ")";
      if (field_count(f.system) == 4) os << "; coth/cot factor of the first-order pair blows up near k1 = " << f.k[0][node];
      throw Error(ErrorCode::SingularJacobian, os.str());
    }
    if (p.limit) lin.limit_nodes.push_back(node);
    for (std::size_t e = 0; e < p.residual.size(); ++e)
      lin.residual[map.slot[node] + static_cast<long>(e)] = p.residual[e];
    all.insert(all.end(), p.entries.begin(), p.entries.end());
  }
  lin.jacobian.resize(static_cast<Eigen::Index>(map.count), static_cast<Eigen::Index>(map.count));
  lin.jacobian.setFromTriplets(all.begin(), all.end());
  return lin;
}

/// Same residual vector as linearize, without derivatives.
inline Eigen::VectorXd residual_vector(const KFields& f, const UnknownMap& map) {
  const ResidualGrid g = constraint_residual(f);
  Eigen::VectorXd r(static_cast<Eigen::Index>(map.count));
  const std::size_t nf = static_cast<std::size_t>(map.fields);
  for (std::size_t node = 0; node < f.nodes(); ++node)
    if (map.slot[node] >= 0)
      for (std::size_t e = 0; e < nf; ++e) r[map.slot[node] + static_cast<long>(e)] = g.at(node, e);
  return r;
}

/// Adds `delta` (indexed like the unknowns) to the fields.
inline void apply_step(KFields& f, const UnknownMap& map, const Eigen::VectorXd& delta, double scale) {
  for (std::size_t node = 0; node < f.nodes(); ++node)
    if (map.slot[node] >= 0)
      for (int m = 0; m < map.fields; ++m) f.k[m][node] += scale * delta[map.slot[node] + m];
}

// ---- Newton -----------------------------------------------------------------

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  double damping = 1.0;   // first trial step length
  int max_backtracks = 12;  // halvings per iteration
  bool regularize = true;   // fall back to a Levenberg step if LU fails
};

struct NewtonRecord {
  int iteration = 0;
  double residual = 0.0;  // max |defect| after the step
  double step = 0.0;      // accepted step length
  bool regularized = false;
};

struct NewtonResult {
  KFields fields;
  std::vector<NewtonRecord> history;  // entry 0 is the initial state
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  std::vector<std::size_t> limit_nodes;

  nlohmann::json history_json() const {
    nlohmann::json h = nlohmann::json::array();
    for (const auto& r : history)
      h.push_back({{"iteration", r.iteration}, {"residual", r.residual}, {"step", r.step}, {"regularized", r.regularized}});
    return h;
  }
};

/// Runs damped Newton and reports the outcome without throwing on
/// non-convergence, so callers can still write the history.
inline NewtonResult newton_iterate(KFields k0, const NewtonOptions& opt = {}) {
  for (const auto& c : k0.k)
    for (double x : c)
      if (!std::isfinite(x)) throw Error(ErrorCode::Configuration, "initial k-fields contain non-finite values");
  const UnknownMap map = unknown_map(k0);
  NewtonResult res;
  res.fields = std::move(k0);
  Eigen::VectorXd F = residual_vector(res.fields, map);
  double norm = F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
  res.history.push_back({0, norm, 0.0, false});
  while (norm >= opt.tol && res.iterations < opt.max_iter) {
    const Linearization lin = linearize(res.fields, map);
    Eigen::VectorXd delta;
    bool regularized = false;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(lin.jacobian);
    lu.factorize(lin.jacobian);
    if (lu.info() == Eigen::Success) delta = lu.solve(-lin.residual);
    if (lu.info() != Eigen::Success || !delta.allFinite()) {
      if (!opt.regularize)
        throw Error(ErrorCode::SingularJacobian, "sparse LU failed: " + lu.lastErrorMessage());
      const Eigen::SparseMatrix<double> jt = lin.jacobian.transpose();
      Eigen::SparseMatrix<double> normal = jt * lin.jacobian;
      double scale = 0.0;
      for (int c = 0; c < normal.cols(); ++c) scale = std::max(scale, normal.coeff(c, c));
      Eigen::SparseMatrix<double> id(normal.rows(), normal.cols());
      id.setIdentity();
      normal += (1e-12 * std::max(scale, 1.0)) * id;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
      if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SingularJacobian, "regularized normal equations failed");
      delta = ldlt.solve(-(jt * lin.residual));
      regularized = true;
    }
    // Backtracking on the max-norm with a fixed halving schedule.
    double step = opt.damping;
    KFields trial = res.fields;
    double trial_norm = std::numeric_limits<double>::infinity();
    for (int b = 0; b <= opt.max_backtracks; ++b) {
      trial = res.fields;
      apply_step(trial, map, delta, step);
      const Eigen::VectorXd Ft = residual_vector(trial, map);
      trial_norm = Ft.allFinite() ? Ft.cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity();
      if (trial_norm < norm || b == opt.max_backtracks) break;
      step *= 0.5;
    }
    ++res.iterations;
    if (!std::isfinite(trial_norm)) break;
    res.fields = std::move(trial);
    norm = trial_norm;
    res.history.push_back({res.iterations, norm, step, regularized});
    res.limit_nodes = lin.limit_nodes;
  }
  res.residual = norm;
  res.converged = norm < opt.tol;
  if (res.limit_nodes.empty()) res.limit_nodes = constraint_residual(res.fields).limit_nodes;
  return res;
}

/// newton_iterate, throwing NonConvergence when the tolerance is not reached.
inline NewtonResult newton_solve(const KFields& k0, const NewtonOptions& opt = {}) {
  NewtonResult r = newton_iterate(k0, opt);
  if (!r.converged) {
    const ResidualGrid g = constraint_residual(r.fields);
    const auto [node, eq] = g.argmax();
    std::ostringstream os;
    os.precision(6);
    os << "no convergence after " << r.iterations << " iterations; final residual " << r.residual << " ("
       << g.labels[eq] << " at node " << node % g.nu << ", " << node / g.nu << ")";
    throw Error(ErrorCode::NonConvergence, os.str());
  }
  return r;
}

// ---- constant solutions -----------------------------------------------------

/// A constant solution of the system. For the two-field systems the
/// right-hand sides are e^{…}(α + βe^{2k₁} + γe^{2k₂}), so constant solutions
/// are the positive solutions of a 2×2 linear system in (e^{2k₁}, e^{2k₂});
/// NonConvergence reports the obstruction when there is none. The four-field
/// systems have one-parameter families; a representative is returned.
inline std::array<double, 4> constant_solution(SystemId sys) {
  switch (sys) {
    case SystemId::constraa: return {0.0, 0.0, 0.0, 0.0};
    case SystemId::kh: return {std::numbers::pi / 2.0, 0.0, 0.0, 0.0};
    case SystemId::kh2: return {0.0, 0.0, 0.0, 0.0};
    case SystemId::cpk1: {
      const double c = 0.5;
      const double k2 = 0.5 * std::log(std::cosh(2.0 * c));
      return {c, k2, std::sqrt(2.0 * std::cbrt(2.0) * std::exp(-2.0 * k2 / 3.0)), 0.0};
    }
    default: break;
  }
  // Coefficients (α, β, γ) of each bracket, read off laplacian_rhs by probing.
  auto bracket = [&](int eq, double x, double y) {
    const std::array<double, 4> k = {0.5 * std::log(x), 0.5 * std::log(y), 0.0, 0.0};
    const double pre = std::exp(-0.4 * (2.0 * k[0] + k[1]));
    return laplacian_rhs(sys, k)[static_cast<std::size_t>(eq)] / pre;
  };
  double A[2][3];
  for (int eq = 0; eq < 2; ++eq) {
    const double base = bracket(eq, 1.0, 1.0);
    const double bx = bracket(eq, 2.0, 1.0) - base, by = bracket(eq, 1.0, 2.0) - base;
    A[eq][0] = base - bx - by;
    A[eq][1] = bx;
    A[eq][2] = by;
  }
  auto fmt = [](double x) {
    std::ostringstream os;
    os.precision(6);
    os << (std::abs(x) < 1e-12 ? 0.0 : x);
    return os.str();
  };
  const double det = A[0][1] * A[1][2] - A[0][2] * A[1][1];
  if (std::abs(det) < 1e-12) {
    // Both brackets constrain the same combination; read off the two values.
    std::string why = "no constant solution exists: the two equations require ";
    for (int eq = 0; eq < 2; ++eq) {
      const double coef = A[eq][2] != 0.0 ? A[eq][2] : A[eq][1];
      why += std::string(A[eq][2] != 0.0 ? "e^{2k2} = " : "e^{2k1} = ") + fmt(-A[eq][0] / coef);
      why += eq == 0 ? " and " : ", which is inconsistent";
    }
    throw Error(ErrorCode::NonConvergence, why);
  }
  const double x = (-A[0][0] * A[1][2] + A[1][0] * A[0][2]) / det;
  const double y = (-A[0][1] * A[1][0] + A[1][1] * A[0][0]) / det;
  if (!(x > 0.0) || !(y > 0.0)) {
    throw Error(ErrorCode::NonConvergence, "no constant solution exists: elimination gives e^{2k1} = " + fmt(x) +
                                               ", e^{2k2} = " + fmt(y) + " (exponentials must be positive)");
  }
  return {0.5 * std::log(x), 0.5 * std::log(y), 0.0, 0.0};
}

// ---- degeneracy scan --------------------------------------------------------

/// (s, t) box over which the generic-branch formulas are evaluated.
struct CoordinateBox {
  double s0 = -0.5, s1 = 0.5;
  double t0 = 0.5, t1 = 1.0;
};

inline CoordinateBox default_box(SystemId sys) {
  const double eps = system_epsilon(sys);
  CoordinateBox b;
  if (eps == 0 || sys == SystemId::kh2 || sys == SystemId::kh3) {
    b.t0 = 0.5;
    b.t1 = 1.0;
  } else {
    b.t0 = -0.25;
    b.t1 = 0.25;
  }
  return b;
}

struct DegeneracyFlag {
  int i = 0, j = 0;
  double u = 0.0, v = 0.0;
  std::string reason;
};

struct DegeneracyReport {
  std::size_t nodes = 0;
  std::vector<DegeneracyFlag> flags;

  bool empty() const { return flags.empty(); }
  std::size_t count(const std::string& reason) const {
    return static_cast<std::size_t>(
        std::count_if(flags.begin(), flags.end(), [&](const DegeneracyFlag& f) { return f.reason == reason; }));
  }
  /// One line per reason, e.g. "degenerate: b2=0 everywhere".
  std::vector<std::string> summary() const {
    std::vector<std::string> reasons;
    for (const auto& f : flags)
      if (std::find(reasons.begin(), reasons.end(), f.reason) == reasons.end()) reasons.push_back(f.reason);
    std::vector<std::string> out;
    for (const auto& r : reasons) {
      const std::size_t c = count(r);
      out.push_back("degenerate: " + r + (c == nodes ? " everywhere" : " at " + std::to_string(c) + " of " +
                                                                           std::to_string(nodes) + " nodes"));
    }
    return out;
  }
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["nodes"] = nodes;
    j["summary"] = summary();
    nlohmann::json fl = nlohmann::json::array();
    for (const auto& f : flags) fl.push_back({{"i", f.i}, {"j", f.j}, {"u", f.u}, {"v", f.v}, {"reason", f.reason}});
    j["flags"] = fl;
    return j;
  }
};

inline constexpr double kDegeneracyFloor = 1e-8;

/// Flags nodes where the solved fields leave the generic branch: b₂ = 0,
/// r ≤ 0 or non-finite, closed-form denominators vanishing inside `box`, and
/// nodes handled by the limit form of the first-order pair.
inline DegeneracyReport degeneracy_scan(const KFields& f, const CoordinateBox& box) {
  DegeneracyReport rep;
  rep.nodes = f.nodes();
  const SystemId sys = f.system;
  const bool regular = !z_singular(sys);
  const bool hyp = sys == SystemId::kh;
  for (int j = 0; j < f.nv; ++j)
    for (int i = 0; i < f.nu; ++i) {
      auto flag = [&](const std::string& why) { rep.flags.push_back({i, j, f.u(i), f.v(j), why}); };
      const double k1 = f.at(0, i, j), k2 = f.at(1, i, j);
      if (!std::isfinite(k1) || !std::isfinite(k2) || !std::isfinite(f.at(2, i, j)) || !std::isfinite(f.at(3, i, j))) {
        flag("non-finite k");
        continue;
      }
      if (!(std::exp(k2) > 0.0)) flag("r<=0");
      if (!regular) continue;
      const double b2_factor = hyp ? std::sin(2.0 * k1) : std::sinh(2.0 * k1);
      if (std::abs(b2_factor) < kDegeneracyFloor) flag("b2=0");
      // Smallest denominator over the s-range of the box.
      double dmin;
      if (hyp) {
        const double smin = (box.s0 <= 0.0 && box.s1 >= 0.0) ? 0.0 : std::min(std::abs(box.s0), std::abs(box.s1));
        dmin = std::cosh(2.0 * smin) + std::cos(2.0 * k1);
      } else {
        const double half_pi = std::numbers::pi / 2.0;
        const bool hits = std::floor((box.s1 - half_pi) / std::numbers::pi) >= std::ceil((box.s0 - half_pi) / std::numbers::pi);
        const double cmin = hits ? -1.0 : std::min(std::cos(2.0 * box.s0), std::cos(2.0 * box.s1));
        dmin = cmin + std::cosh(2.0 * k1);
      }
      if (std::abs(dmin) <= 1e-6) flag("gauge denominator vanishes in box");
      if (node_form(sys, k1).any()) flag("singular node (limit form)");
    }
  return rep;
}

inline DegeneracyReport degeneracy_scan(const KFields& f) { return degeneracy_scan(f, default_box(f.system)); }

}  // namespace slag
