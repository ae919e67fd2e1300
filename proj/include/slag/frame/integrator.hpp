// SPDX-License-Identifier: MIT
//
// Moving-frame integration: classical RK4 along coordinate lines in a fixed
// axis schedule, Gram drift monitoring, path-independence check, alignment
// against a reference immersion and certification of the result.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "slag/catalog/verify.hpp"
#include "slag/frame/model.hpp"
#include "slag/parallel.hpp"

namespace slag {

/// Rows F, X₁…X₄ of ambient vectors.
struct FrameState {
  Eigen::Matrix<cplx, 5, Eigen::Dynamic> rows;
  int signature_index = 0;

  int dim() const { return static_cast<int>(rows.cols()); }
  CVector row(int r) const {
    CVector v{std::vector<cplx>(static_cast<std::size_t>(dim())), signature_index};
    for (int c = 0; c < dim(); ++c) v[static_cast<std::size_t>(c)] = rows(r, c);
    return v;
  }
  CVector F() const { return row(0); }
  CVector X(int i) const { return row(1 + i); }
};

inline FrameState make_state(const CVector& f, const std::array<CVector, 4>& x) {
  FrameState s;
  s.signature_index = f.signature_index;
  s.rows.resize(5, static_cast<Eigen::Index>(f.size()));
  for (std::size_t c = 0; c < f.size(); ++c) {
    s.rows(0, static_cast<Eigen::Index>(c)) = f[c];
    for (int i = 0; i < 4; ++i) {
      if (x[static_cast<std::size_t>(i)].size() != f.size())
        throw Error(ErrorCode::DimensionMismatch, "frame vectors differ in length");
      s.rows(1 + i, static_cast<Eigen::Index>(c)) = x[static_cast<std::size_t>(i)][c];
    }
  }
  return s;
}

/// ε = 0: F₀ = 0 and X_i = e_i in ℂ⁴. ε = ±1: F₀ = e₀ (unit, resp. unit
/// timelike) and X_i = e_i in ℂ⁵(₁); the real span of e₁…e₄ is horizontal
/// and Lagrangian.
inline FrameState standard_frame(const AmbientSpace& amb) {
  amb.validate();
  FrameState s;
  s.signature_index = amb.signature_index;
  s.rows = Eigen::Matrix<cplx, 5, Eigen::Dynamic>::Zero(5, amb.complex_dim);
  const int off = amb.epsilon == 0 ? 0 : 1;
  if (amb.complex_dim < 4 + off) throw Error(ErrorCode::DimensionMismatch, "ambient too small for a 4-frame");
  if (off) s.rows(0, 0) = 1.0;
  for (int i = 0; i < 4; ++i) s.rows(1 + i, i + off) = 1.0;
  return s;
}

/// The immersion's own frame at p: F(p) and the Gram–Schmidt frame used by
/// immersion_model, pushed forward.
inline FrameState reference_frame(const Immersion& imm, const Point4& p) {
  const Jet2 jet = evaluate_jet(imm, p);
  const Eigen::MatrixXd e = orthonormalizer(induced_metric(jet));
  std::array<CVector, 4> x;
  for (int i = 0; i < 4; ++i) {
    CVector v{std::vector<cplx>(jet.value.size()), jet.value.signature_index};
    for (int a = 0; a < 4; ++a) v = v + e(a, i) * jet.d1[static_cast<std::size_t>(a)];
    x[static_cast<std::size_t>(i)] = v;
  }
  return make_state(jet.value, x);
}

/// Largest violation of ⟨X_i, X_j⟩ = δ_ij (complex, so Lagrangian too) and,
/// for ε ≠ 0, of ⟨F, F⟩ = ε and ⟨X_i, F⟩ = 0.
inline double gram_residual(const FrameState& s, int epsilon) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const cplx h = hermitian_product(s.X(i), s.X(j));
      worst = std::max(worst, std::abs(h - cplx(i == j ? 1.0 : 0.0, 0.0)));
    }
  if (epsilon != 0) {
    const CVector f = s.F();
    worst = std::max(worst, std::abs(hermitian_product(f, f) - cplx(epsilon, 0.0)));
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(hermitian_product(s.X(i), f)));
  }
  return worst;
}

/// Restores the Gram conditions: F rescaled to ⟨F,F⟩ = ε, then Hermitian
/// Gram–Schmidt of X₁…X₄ against F and each other.
inline void reorthonormalize(FrameState& s, int epsilon) {
  auto prod = [&](int a, int b) { return hermitian_product(s.row(a), s.row(b)); };
  if (epsilon != 0) s.rows.row(0) /= std::sqrt(std::abs(prod(0, 0).real()));
  for (int i = 1; i < 5; ++i) {
    if (epsilon != 0) s.rows.row(i) -= (prod(i, 0) / prod(0, 0)) * s.rows.row(0);
    for (int j = 1; j < i; ++j) s.rows.row(i) -= prod(i, j) * s.rows.row(j);
    s.rows.row(i) /= std::sqrt(prod(i, i).real());
  }
}

// ---- grid ------------------------------------------------------------------

inline const char* axis_name(int a) {
  static constexpr const char* names[] = {"t", "s", "u", "v"};
  return names[a];
}

/// Nodes origin + i·step per axis, i < count. Axis 0 varies fastest in the
/// node index. `schedule` is the order in which axes are swept.
struct ReconstructionGrid {
  Point4 origin{0.0, 0.0, 0.0, 0.0};
  Point4 step{0.0, 0.0, 0.0, 0.0};
  std::array<int, 4> count{1, 1, 1, 1};
  std::array<int, 4> schedule{0, 1, 2, 3};

  std::size_t nodes() const {
    std::size_t n = 1;
    for (int c : count) n *= static_cast<std::size_t>(c);
    return n;
  }
  std::size_t index(const std::array<int, 4>& i) const {
    return static_cast<std::size_t>(i[0] + count[0] * (i[1] + count[1] * (i[2] + count[2] * i[3])));
  }
  std::array<int, 4> multi(std::size_t k) const {
    std::array<int, 4> i{};
    for (std::size_t a = 0; a < 4; ++a) {
      i[a] = static_cast<int>(k % static_cast<std::size_t>(count[a]));
      k /= static_cast<std::size_t>(count[a]);
    }
    return i;
  }
  Point4 point(const std::array<int, 4>& i) const {
    Point4 p{};
    for (std::size_t a = 0; a < 4; ++a) p[a] = origin[a] + i[a] * step[a];
    return p;
  }
  Point4 point(std::size_t k) const { return point(multi(k)); }

  /// Box [lo, hi] per axis with n nodes per axis.
  static ReconstructionGrid box(const Point4& lo, const Point4& hi, const std::array<int, 4>& n) {
    ReconstructionGrid g;
    g.origin = lo;
    g.count = n;
    for (std::size_t a = 0; a < 4; ++a) g.step[a] = n[a] > 1 ? (hi[a] - lo[a]) / (n[a] - 1) : 0.0;
    return g;
  }
};

namespace detail {

inline void validate_grid(const ReconstructionGrid& g, const FrameModel& m) {
  std::array<int, 4> seen{};
  for (int a : g.schedule) {
    if (a < 0 || a > 3 || seen[static_cast<std::size_t>(a)]++)
      throw Error(ErrorCode::Configuration, "schedule must be a permutation of t, s, u, v");
  }
  for (std::size_t a = 0; a < 4; ++a) {
    if (g.count[a] < 1) throw Error(ErrorCode::Configuration, std::string("need at least one node along ") + axis_name(int(a)));
    if (g.count[a] > 1 && !(std::isfinite(g.step[a]) && g.step[a] != 0.0))
      throw Error(ErrorCode::Configuration, std::string("zero step along ") + axis_name(int(a)));
    const double q = m.quantum[a];
    if (q > 0.0 && g.count[a] > 1) {
      // RK4 evaluates at half steps, which must land on the lattice.
      auto on_lattice = [q](double x) { return std::abs(x / q - std::round(x / q)) < 1e-7; };
      if (!on_lattice(0.5 * g.step[a]) || !on_lattice(g.origin[a])) {
        std::ostringstream os;
        os << "step along " << axis_name(int(a)) << " must be an even multiple of the k-field spacing " << q
           << " and the origin a node";
        throw Error(ErrorCode::Configuration, os.str());
      }
    }
  }
}

using Rows = Eigen::Matrix<cplx, 5, Eigen::Dynamic>;

}  // namespace detail

/// An error from the frame data, tagged with the coordinate point.
class PointError : public Error {
 public:
  PointError(const Error& e, const Point4& p)
      : Error(e.code(), std::string(e.what()).substr(to_string(e.code()).size() + 2)), point_(p) {}
  const Point4& point() const noexcept { return point_; }

 private:
  Point4 point_;
};

namespace detail {

inline Rows rhs(const FrameModel& m, const Point4& p, int axis, const Rows& s) {
  try {
    return assemble_rhs(m.data(p), m.ambient.epsilon, axis) * s;
  } catch (const PointError&) {
    throw;
  } catch (const Error& e) {
    throw PointError(e, p);
  }
}

inline Rows rk4_step(const FrameModel& m, const Rows& s, Point4 p, int axis, double h) {
  const auto a = static_cast<std::size_t>(axis);
  const Rows k1 = rhs(m, p, axis, s);
  Point4 mid = p;
  mid[a] += 0.5 * h;
  const Rows k2 = rhs(m, mid, axis, s + (0.5 * h) * k1);
  const Rows k3 = rhs(m, mid, axis, s + (0.5 * h) * k2);
  Point4 end = p;
  end[a] += h;
  const Rows k4 = rhs(m, end, axis, s + h * k3);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

struct IntegrateOptions {
  double drift_tol = 1e-6;
  double init_tol = 1e-12;
  bool reorthonormalize = false;
};

/// FrameState at every node of a grid.
struct DiscreteImmersion {
  std::string model;
  ReconstructionGrid grid;
  AmbientSpace ambient;
  std::vector<FrameState> states;
  double max_drift = 0.0;
  Point4 drift_argmax{};
  bool reorthonormalized = false;

  const FrameState& at(const std::array<int, 4>& i) const { return states[grid.index(i)]; }
};

namespace detail {

inline void check_init(const FrameState& init, const FrameModel& m, double tol) {
  if (init.dim() != m.ambient.complex_dim || init.signature_index != m.ambient.signature_index)
    throw Error(ErrorCode::DimensionMismatch, "initial frame does not live in the model's ambient space");
  const double g = gram_residual(init, m.ambient.epsilon);
  if (!(g <= tol)) {
    std::ostringstream os;
    os << "initial frame violates the Gram conditions by " << g;
    throw Error(ErrorCode::Configuration, os.str());
  }
}

inline std::string where(const Point4& p) {
  std::ostringstream os;
  os << "(t, s, u, v) = (" << p[0] << ", " << p[1] << ", " << p[2] << ", " << p[3] << ")";
  return os.str();
}

}  // namespace detail

/// Sweeps the schedule: the first axis from the origin, then every later axis
/// from each node already reached. Lines of one sweep run concurrently.
inline DiscreteImmersion integrate_frame(const FrameModel& m, const ReconstructionGrid& grid, const FrameState& init,
                                         const IntegrateOptions& opt = {}) {
  detail::validate_grid(grid, m);
  detail::check_init(init, m, opt.init_tol);
  const int eps = m.ambient.epsilon;
  DiscreteImmersion out;
  out.model = m.name;
  out.grid = grid;
  out.ambient = m.ambient;
  out.reorthonormalized = opt.reorthonormalize;
  out.states.assign(grid.nodes(), FrameState{});
  out.states[0] = init;

  std::array<bool, 4> done{};
  for (int axis : grid.schedule) {
    const auto ua = static_cast<std::size_t>(axis);
    // Seeds: reached nodes with index 0 along this and every later axis.
    std::vector<std::size_t> seeds;
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      const auto i = grid.multi(k);
      bool ok = true;
      for (std::size_t a = 0; a < 4; ++a) ok = ok && (done[a] || i[a] == 0);
      if (ok) seeds.push_back(k);
    }
    done[ua] = true;
    if (grid.count[ua] == 1) continue;
    struct Line {
      std::vector<FrameState> states;
      double drift = 0.0;
      Point4 at{};
    };
    const auto lines = parallel_map<Line>(seeds.size(), [&](std::size_t n) {
      Line line;
      auto idx = grid.multi(seeds[n]);
      FrameState s = out.states[seeds[n]];
      for (int step = 1; step < grid.count[ua]; ++step) {
        const Point4 p = grid.point(idx);
        s.rows = detail::rk4_step(m, s.rows, p, axis, grid.step[ua]);
        ++idx[ua];
        const double d = gram_residual(s, eps);
        if (!(d <= opt.drift_tol)) {
          std::ostringstream os;
          os << "Gram residual " << d << " exceeds " << opt.drift_tol << " at " << detail::where(grid.point(idx));
          throw Error(ErrorCode::InvariantDrift, os.str());
        }
        if (d > line.drift) {
          line.drift = d;
          line.at = grid.point(idx);
        }
        if (opt.reorthonormalize) reorthonormalize(s, eps);
        line.states.push_back(s);
      }
      return line;
    });
    for (std::size_t n = 0; n < seeds.size(); ++n) {
      auto idx = grid.multi(seeds[n]);
      for (const auto& s : lines[n].states) {
        ++idx[ua];
        out.states[grid.index(idx)] = s;
      }
      if (lines[n].drift > out.max_drift) {
        out.max_drift = lines[n].drift;
        out.drift_argmax = lines[n].at;
      }
    }
  }
  return out;
}

/// Integrates from the origin to the far corner along the axes in `order`,
/// taking the grid's steps. Returns the end state.
inline FrameState integrate_path(const FrameModel& m, const ReconstructionGrid& grid, const FrameState& init,
                                 const std::array<int, 4>& order, const IntegrateOptions& opt = {}) {
  ReconstructionGrid g = grid;
  g.schedule = order;
  detail::validate_grid(g, m);
  detail::check_init(init, m, opt.init_tol);
  FrameState s = init;
  std::array<int, 4> idx{};
  for (int axis : order) {
    const auto ua = static_cast<std::size_t>(axis);
    for (int step = 1; step < g.count[ua]; ++step) {
      s.rows = detail::rk4_step(m, s.rows, g.point(idx), axis, g.step[ua]);
      ++idx[ua];
      const double d = gram_residual(s, m.ambient.epsilon);
      if (!(d <= opt.drift_tol)) {
        std::ostringstream os;
        os << "Gram residual " << d << " exceeds " << opt.drift_tol << " at " << detail::where(g.point(idx));
        throw Error(ErrorCode::InvariantDrift, os.str());
      }
      if (opt.reorthonormalize) reorthonormalize(s, m.ambient.epsilon);
    }
  }
  return s;
}

inline double state_distance(const FrameState& a, const FrameState& b) {
  return (a.rows - b.rows).cwiseAbs().maxCoeff();
}

/// Mismatch at the far corner between the t→s→u→v and v→u→s→t paths from
/// the standard frame. Drift is not enforced here: incompatible data is
/// allowed to wander, that is what is being measured.
inline double compatibility_check(const FrameModel& m, const ReconstructionGrid& grid) {
  if (grid.nodes() == 1) return 0.0;
  const FrameState init = standard_frame(m.ambient);
  IntegrateOptions loose;
  loose.drift_tol = std::numeric_limits<double>::infinity();
  const FrameState a = integrate_path(m, grid, init, {0, 1, 2, 3}, loose);
  const FrameState b = integrate_path(m, grid, init, {3, 2, 1, 0}, loose);
  return state_distance(a, b);
}

// ---- alignment -------------------------------------------------------------

/// Ambient isometry z ↦ U z + shift.
struct AmbientMap {
  Eigen::MatrixXcd U;
  Eigen::VectorXcd shift;

  CVector apply(const CVector& z) const {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(z.size()));
    for (std::size_t c = 0; c < z.size(); ++c) v(static_cast<Eigen::Index>(c)) = z[c];
    const Eigen::VectorXcd w = U * v + shift;
    CVector out{std::vector<cplx>(z.size()), z.signature_index};
    for (std::size_t c = 0; c < z.size(); ++c) out[c] = w(static_cast<Eigen::Index>(c));
    return out;
  }
};

/// The isometry carrying frame `from` onto frame `to`: U maps F, X₁…X₄ (ε ≠ 0)
/// or X₁…X₄ plus a translation (ε = 0), which are complex bases.
inline AmbientMap alignment(const FrameState& from, const FrameState& to, int epsilon) {
  if (from.dim() != to.dim()) throw Error(ErrorCode::DimensionMismatch, "frames live in different spaces");
  const int first = epsilon == 0 ? 1 : 0;
  const Eigen::MatrixXcd a = from.rows.bottomRows(5 - first).transpose();
  const Eigen::MatrixXcd b = to.rows.bottomRows(5 - first).transpose();
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "frame does not span the ambient space");
  AmbientMap m;
  m.U = b * a.inverse();
  m.shift = Eigen::VectorXcd::Zero(a.rows());
  if (epsilon == 0) m.shift = to.rows.row(0).transpose() - m.U * from.rows.row(0).transpose();
  return m;
}

struct AlignmentError {
  double max = 0.0;
  Point4 argmax{};
};

/// max over nodes of |map(F_rec) − F_ref| (Euclidean norm of the difference).
inline AlignmentError alignment_error(const DiscreteImmersion& d, const Immersion& ref, const AmbientMap& map) {
  AlignmentError e;
  for (std::size_t k = 0; k < d.states.size(); ++k) {
    const Point4 p = d.grid.point(k);
    const double err = euclidean_norm(map.apply(d.states[k].F()) - ref.value(p));
    if (k == 0 || err > e.max) {
      e.max = err;
      e.argmax = p;
    }
  }
  return e;
}

// ---- certification ---------------------------------------------------------

namespace detail {

// Central-difference weights for the first/second derivative at offset 0,
// fourth order when two neighbours exist on each side, else second order.
struct Stencil {
  std::vector<int> off;
  std::vector<double> d1, d2;
};

inline Stencil stencil(int i, int n, double h) {
  Stencil s;
  if (i >= 2 && i <= n - 3) {
    s.off = {-2, -1, 0, 1, 2};
    s.d1 = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    s.d2 = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  } else {
    s.off = {-1, 0, 1};
    s.d1 = {-0.5, 0.0, 0.5};
    s.d2 = {1.0, -2.0, 1.0};
  }
  for (auto& w : s.d1) w /= h;
  for (auto& w : s.d2) w /= h * h;
  return s;
}

inline Jet2 discrete_jet(const DiscreteImmersion& d, const std::array<int, 4>& i) {
  const auto& g = d.grid;
  std::array<Stencil, 4> st;
  for (std::size_t a = 0; a < 4; ++a) st[a] = stencil(i[a], g.count[a], g.step[a]);
  auto f = [&](std::array<int, 4> j) { return d.at(j).F(); };
  Jet2 jet = Jet2::zeros(4, static_cast<std::size_t>(d.ambient.complex_dim), d.ambient.signature_index);
  jet.value = f(i);
  for (int a = 0; a < 4; ++a) {
    const auto& s = st[static_cast<std::size_t>(a)];
    for (std::size_t m = 0; m < s.off.size(); ++m) {
      auto j = i;
      j[static_cast<std::size_t>(a)] += s.off[m];
      const CVector v = f(j);
      if (s.d1[m] != 0.0) jet.d1[static_cast<std::size_t>(a)] = jet.d1[static_cast<std::size_t>(a)] + s.d1[m] * v;
      jet.d2(a, a) = jet.d2(a, a) + s.d2[m] * v;
    }
    for (int b = a + 1; b < 4; ++b) {
      const auto& t = st[static_cast<std::size_t>(b)];
      for (std::size_t m = 0; m < s.off.size(); ++m)
        for (std::size_t n = 0; n < t.off.size(); ++n) {
          const double w = s.d1[m] * t.d1[n];
          if (w == 0.0) continue;
          auto j = i;
          j[static_cast<std::size_t>(a)] += s.off[m];
          j[static_cast<std::size_t>(b)] += t.off[n];
          jet.d2(a, b) = jet.d2(a, b) + w * f(j);
        }
    }
  }
  return jet;
}

}  // namespace detail

inline Tolerances reconstruction_tolerances(double tol = 1e-4) {
  return {tol, tol, tol, tol, tol, tol, tol};
}

/// Finite-difference jets of F at interior nodes, then the catalog's
/// pointwise checks. Along axes with at least 5 nodes only nodes with the
/// 5-point stencil count as interior; shorter axes use 3 points.
inline VerificationReport certify_reconstruction(const DiscreteImmersion& d,
                                                 const Tolerances& tol = reconstruction_tolerances()) {
  VerificationReport rep;
  rep.case_name = d.model;
  rep.epsilon = d.ambient.epsilon;
  rep.grid = *std::max_element(d.grid.count.begin(), d.grid.count.end());
  const LiftMode lift = lift_for_epsilon(d.ambient.epsilon);
  detail::set_tolerances(rep, lift, tol);

  std::vector<std::array<int, 4>> interior;
  for (std::size_t k = 0; k < d.grid.nodes(); ++k) {
    const auto i = d.grid.multi(k);
    bool ok = true;
    for (std::size_t a = 0; a < 4; ++a) {
      const int margin = d.grid.count[a] >= 5 ? 2 : 1;
      ok = ok && i[a] >= margin && i[a] <= d.grid.count[a] - 1 - margin;
    }
    if (ok) interior.push_back(i);
  }
  if (interior.empty()) {
    const Point4 p = d.grid.origin;
    rep.failures.push_back(PointFailure{std::vector<double>(p.begin(), p.end()), ErrorCode::InsufficientStencil,
                                        "certification needs at least 3 nodes along every axis"});
    rep.passed = false;
    return rep;
  }
  std::vector<std::vector<double>> pts(interior.size());
  for (std::size_t n = 0; n < interior.size(); ++n) {
    const Point4 p = d.grid.point(interior[n]);
    pts[n].assign(p.begin(), p.end());
  }
  const auto results = parallel_map<detail::PointResult>(interior.size(), [&](std::size_t n) {
    return detail::check_jet(detail::discrete_jet(d, interior[n]), d.ambient, lift, pts[n],
                             std::numeric_limits<double>::infinity());
  });
  detail::collect(rep, pts, results);
  return rep;
}

// ---- serialization ---------------------------------------------------------

/// One row per node: t, s, u, v, then Re/Im of every component of F.
inline std::string immersion_csv(const DiscreteImmersion& d) {
  std::ostringstream os;
  os.precision(17);
  os << "t,s,u,v";
  for (int c = 0; c < d.ambient.complex_dim; ++c) os << ",re" << c << ",im" << c;
  os << '\n';
  for (std::size_t k = 0; k < d.states.size(); ++k) {
    const Point4 p = d.grid.point(k);
    os << p[0] << ',' << p[1] << ',' << p[2] << ',' << p[3];
    for (int c = 0; c < d.ambient.complex_dim; ++c) {
      const cplx z = d.states[k].rows(0, c);
      os << ',' << z.real() << ',' << z.imag();
    }
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json grid_json(const ReconstructionGrid& g) {
  nlohmann::json j;
  j["origin"] = g.origin;
  j["step"] = g.step;
  j["count"] = g.count;
  std::vector<std::string> order;
  for (int a : g.schedule) order.emplace_back(axis_name(a));
  j["schedule"] = order;
  return j;
}

inline nlohmann::json drift_json(const DiscreteImmersion& d) {
  return {{"max", d.max_drift}, {"argmax", d.drift_argmax}, {"reorthonormalized", d.reorthonormalized}};
}

}  // namespace slag
