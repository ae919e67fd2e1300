// SPDX-License-Identifier: MIT
//
// Grid sweeps of the geometry checks over an immersion.
#pragma once

#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "slag/catalog/cases.hpp"
#include "slag/fundamental.hpp"
#include "slag/parallel.hpp"

namespace slag {

struct Tolerances {
  double kahler = 1e-8;
  double minimality = 1e-8;
  double symmetry = 1e-8;
  double shape = 1e-8;
  double horizontality = 1e-8;
  double lift_norm = 1e-10;
  double gauss_lift = 1e-8;
};

struct ResidualMax {
  double value = 0.0;
  std::vector<double> argmax;

  void take(double v, const std::vector<double>& at) {
    if (!(v <= value)) {  // NaN always wins
      value = v;
      argmax = at;
    }
  }
};

struct PointFailure {
  std::vector<double> point;
  ErrorCode code{};
  std::string message;
};

struct VerificationReport {
  std::string case_name;
  int epsilon = 0;
  int grid = 0;
  std::map<std::string, ResidualMax> residuals;
  double r_min = 0.0;
  double r_max = 0.0;
  std::vector<double> r_argmin;
  bool degenerate = false;
  std::vector<PointFailure> failures;
  std::map<std::string, double> tolerances;
  bool passed = false;

  double get(const std::string& k) const {
    auto it = residuals.find(k);
    return it == residuals.end() ? 0.0 : it->second.value;
  }

  /// Name of the worst residual relative to its tolerance, if any failed.
  std::optional<std::string> worst_failure() const {
    std::optional<std::string> out;
    double worst = 1.0;
    for (const auto& [k, r] : residuals) {
      auto t = tolerances.find(k);
      if (t == tolerances.end()) continue;
      const double ratio = r.value / t->second;
      if (!(ratio <= worst)) {
        worst = ratio;
        out = k;
      }
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json res = nlohmann::json::object(), where = nlohmann::json::object();
    for (const auto& [k, r] : residuals) {
      res[k] = r.value;
      where[k] = r.argmax;
    }
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& f : failures)
      fails.push_back({{"point", f.point}, {"code", std::string(to_string(f.code))}, {"message", f.message}});
    nlohmann::json j = {{"case", case_name}, {"epsilon", epsilon}, {"grid", grid},     {"residuals", res},
                        {"argmax", where},   {"r_min", r_min},     {"r_max", r_max},   {"r_argmin", r_argmin}, {"degenerate", degenerate},
                        {"failures", fails}, {"tolerances", tolerances}, {"passed", passed}};
    if (auto w = worst_failure()) j["failing_residual"] = *w;
    return j;
  }
};

namespace detail {

struct PointResult {
  std::map<std::string, double> values;
  std::optional<double> r;
  bool degenerate = false;
  std::optional<PointFailure> failure;
};

// All pointwise checks on one jet; errors are recorded against `pt`. A
// finite `shape_tol` makes a non-canonical cubic a point failure; infinity
// only records shape_max.
inline PointResult check_jet(const Jet2& jet, const AmbientSpace& ambient, LiftMode lift,
                             const std::vector<double>& pt, double shape_tol = 1e-6) {
  PointResult out;
  try {
    out.values["kahler_max"] = kahler_form_restriction(jet).cwiseAbs().maxCoeff();
    if (lift != LiftMode::none) {
      const double target = lift == LiftMode::sphere ? 1.0 : -1.0;
      out.values["lift_norm_max"] = std::abs(real_product(jet.value, jet.value) - target);
      double h = 0.0;
      const CVector jf = apply_J(jet.value);
      for (const auto& d : jet.d1) h = std::max(h, std::abs(real_product(jf, d)));
      out.values["horizontality_max"] = h;
    }
    const SecondFundamental sf = second_fundamental_A(jet, ambient, lift);
    out.values["minimality_max"] = minimality_residual(sf.g, sf.c);
    out.values["c_asymmetry_max"] = sf.c_asymmetry;
    if (lift != LiftMode::none) out.values["gauss_lift_max"] = sf.lift_residual;
    try {
      const CanonicalFrame cf = canonicalize_cubic(sf.g, sf.c, 1e-8, shape_tol);
      out.r = cf.r;
      out.values["shape_max"] = cf.shape_residual;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(jet.n, jet.n);
      out.values["symmetry_max"] = symmetry_residual(id, cf.canonical, SymmetryGenerators::standard());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateCubic) throw;
      out.degenerate = true;
      out.r = 0.0;
    }
  } catch (const Error& e) {
    out.failure = PointFailure{pt, e.code(), e.what()};
  }
  return out;
}

inline PointResult check_point(const Immersion& imm, const std::vector<double>& pt) {
  try {
    return check_jet(evaluate_jet(imm, pt), imm.ambient, imm.lift, pt);
  } catch (const Error& e) {
    PointResult out;
    out.failure = PointFailure{pt, e.code(), e.what()};
    return out;
  }
}

inline void set_tolerances(VerificationReport& rep, LiftMode lift, const Tolerances& tol) {
  rep.tolerances = {{"kahler_max", tol.kahler},       {"minimality_max", tol.minimality},
                    {"symmetry_max", tol.symmetry},   {"shape_max", tol.shape},
                    {"c_asymmetry_max", tol.minimality}};
  if (lift != LiftMode::none) {
    rep.tolerances["horizontality_max"] = tol.horizontality;
    rep.tolerances["lift_norm_max"] = tol.lift_norm;
    rep.tolerances["gauss_lift_max"] = tol.gauss_lift;
  }
  for (const auto& [k, t] : rep.tolerances) rep.residuals[k] = ResidualMax{};
}

// Folds point results (in sample order) into the report and sets `passed`.
inline void collect(VerificationReport& rep, const std::vector<std::vector<double>>& pts,
                    const std::vector<PointResult>& results) {
  bool have_r = false;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& pr = results[k];
    const auto& pt = pts[k];
    if (pr.failure) {
      rep.failures.push_back(*pr.failure);
      // The Kähler form is still meaningful when the split was refused.
      if (pr.values.count("kahler_max")) rep.residuals["kahler_max"].take(pr.values.at("kahler_max"), pt);
      continue;
    }
    for (const auto& [key, v] : pr.values) rep.residuals[key].take(v, pt);
    rep.degenerate = rep.degenerate || pr.degenerate;
    if (pr.r) {
      if (!have_r || *pr.r < rep.r_min) rep.r_argmin = pt;
      rep.r_min = have_r ? std::min(rep.r_min, *pr.r) : *pr.r;
      rep.r_max = have_r ? std::max(rep.r_max, *pr.r) : *pr.r;
      have_r = true;
    }
  }
  rep.passed = rep.failures.empty() && !rep.degenerate && !rep.worst_failure().has_value();
}

}  // namespace detail

/// Runs every geometry check on an n-per-axis grid over the immersion's box.
/// Point-level errors are collected, never rethrown.
inline VerificationReport verify_immersion(const Immersion& imm, int grid, const Tolerances& tol = {},
                                           int epsilon = 0) {
  VerificationReport rep;
  rep.case_name = imm.name;
  rep.epsilon = epsilon;
  rep.grid = grid;
  detail::set_tolerances(rep, imm.lift, tol);
  const std::size_t n = imm.domain.grid_size(grid);
  std::vector<std::vector<double>> pts(n);
  for (std::size_t k = 0; k < n; ++k) pts[k] = imm.domain.grid_point(k, grid);
  const auto results =
      parallel_map<detail::PointResult>(n, [&](std::size_t k) { return detail::check_point(imm, pts[k]); });
  detail::collect(rep, pts, results);
  return rep;
}

inline VerificationReport verify_case(const CaseId& c, const BuildingBlock& b, int grid, const Tolerances& tol = {}) {
  VerificationReport rep = verify_immersion(build_immersion(c, b), grid, tol, c.epsilon);
  rep.case_name = c.name;
  return rep;
}

/// Registration check for a block: 9 points per axis. Degenerate (totally
/// geodesic) blocks pass but stay flagged.
inline VerificationReport certify_block(const BuildingBlock& b, int grid = 9, const Tolerances& tol = {}) {
  VerificationReport rep = verify_immersion(b.imm, grid, tol, b.imm.ambient.epsilon);
  if (b.degenerate && rep.degenerate && rep.failures.empty() && !rep.worst_failure()) rep.passed = true;
  if (b.degenerate != rep.degenerate) rep.passed = false;
  return rep;
}

/// Certifies and returns the block; CertificationFailed if it does not pass.
inline BuildingBlock register_block(BuildingBlock b) {
  const auto rep = certify_block(b);
  if (!rep.passed)
    throw Error(ErrorCode::CertificationFailed,
                b.name + " failed certification" + (rep.worst_failure() ? ": " + *rep.worst_failure() : std::string()));
  return b;
}

inline std::vector<BuildingBlock> hyperbolic_blocks() {
  return {register_block(equivariant_legendrian_H5()), register_block(geodesic_legendrian_H5()),
          register_block(clifford_join_H7())};
}

}  // namespace slag
