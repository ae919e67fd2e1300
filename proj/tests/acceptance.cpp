// SPDX-License-Identifier: MIT
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "slag/catalog/cases.hpp"
#include "slag/cubic.hpp"
#include "slag/frame/integrator.hpp"
#include "slag/kfield/fields.hpp"
#include "slag/kfield/solver.hpp"

using namespace slag;

namespace {

constexpr double kPi = std::numbers::pi;

// Fails the enclosing criterion with a message.
struct Check {
  bool ok = true;
  std::string why;
  void require(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      why = msg;
    }
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ---- 1 ---------------------------------------------------------------------------

Check catalog_atlas(std::string& detail) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  double kahler = 0, minimality = 0, shape = 0, lift = 0;
  const auto& cases = case_registry();
  c.require(cases.size() == 12, "registry does not list 12 constructions");
  for (const auto& cs : cases) {
    const VerificationReport rep = verify_case(cs, default_block(cs.block), 5);
    c.require(rep.passed, cs.name + " failed verification");
    kahler = std::max(kahler, rep.get("kahler_max"));
    minimality = std::max(minimality, rep.get("minimality_max"));
    shape = std::max({shape, rep.get("shape_max"), rep.get("symmetry_max")});
    if (cs.epsilon != 0) lift = std::max(lift, rep.get("lift_norm_max"));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(kahler < 1e-9, "kahler_max " + fmt("%.3g", kahler));
  c.require(minimality < 1e-8, "minimality_max " + fmt("%.3g", minimality));
  c.require(shape < 1e-8, "shape/symmetry " + fmt("%.3g", shape));
  c.require(lift < 1e-12, "lift_norm " + fmt("%.3g", lift));
  c.require(secs < 120.0, "runtime " + fmt("%.1f s", secs));
  detail = "12 cases, kahler " + fmt("%.1e", kahler) + ", minimality " + fmt("%.1e", minimality) + ", shape " +
           fmt("%.1e", shape) + ", lift " + fmt("%.1e", lift) + ", " + fmt("%.1f s", secs);
  return c;
}

// ---- 2 ---------------------------------------------------------------------------

Eigen::Matrix4d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = nd(rng);
  Eigen::HouseholderQR<Eigen::Matrix4d> qr(m);
  Eigen::Matrix4d q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

Check canonicalization(std::string& detail) {
  Check c;
  std::mt19937_64 rng(2024);
  double worst = 0;
  for (double r : {0.5, 1.0, 2.0})
    for (int t = 0; t < 100; ++t) {
      const CubicTensor tensor = canonical_pattern(r).transformed(random_rotation(rng).transpose());
      try {
        worst = std::max(worst, std::abs(canonicalize_cubic(Eigen::MatrixXd::Identity(4, 4), tensor).r - r));
      } catch (const Error& e) {
        c.require(false, std::string("conjugated pattern raised ") + e.what());
      }
    }
  c.require(worst < 1e-8, "r error " + fmt("%.3g", worst));
  bool degenerate = false;
  try {
    canonicalize_cubic(Eigen::MatrixXd::Identity(4, 4), CubicTensor(4));
  } catch (const Error& e) {
    degenerate = e.code() == ErrorCode::DegenerateCubic;
  }
  c.require(degenerate, "zero tensor did not raise DegenerateCubic");
  detail = "300 conjugations, max |r - r0| " + fmt("%.1e", worst) + ", zero tensor -> DegenerateCubic";
  return c;
}

// ---- 3 ---------------------------------------------------------------------------

Check exact_k_solutions(std::string& detail) {
  Check c;
  struct Known {
    SystemId sys;
    std::array<double, 4> k;
  };
  const Known known[] = {{SystemId::cpk2, {0.5 * std::log(2.0), 0, 0, 0}},
                         {SystemId::constraa, {0, 0, 0, 0}},
                         {SystemId::kh, {kPi / 2, 0, 0, 0}}};
  double worst = 0;
  for (const auto& [sys, k] : known)
    for (Boundary bc : {Boundary::periodic, Boundary::dirichlet})
      for (auto [nu, nv] : {std::pair{5, 5}, std::pair{8, 13}, std::pair{32, 32}}) {
        KFields f = make_fields(sys, nu, nv, bc);
        fill(f, [&](double, double) { return k; });
        worst = std::max(worst, constraint_residual(f).max_abs());
      }
  c.require(worst < 1e-12, "constant residual " + fmt("%.3g", worst));
  for (SystemId sys : {SystemId::kh3, SystemId::constrab}) {
    bool obstructed = false;
    try {
      constant_solution(sys);
    } catch (const Error& e) {
      obstructed = e.code() == ErrorCode::NonConvergence &&
                   std::string(e.what()).find("no constant solution") != std::string::npos;
    }
    c.require(obstructed, std::string(to_string(sys)) + " obstruction not reported");
  }
  detail = "cpk2/constraa/kh residual " + fmt("%.1e", worst) + " on 18 grids, kh3 and constrab obstructed";
  return c;
}

// ---- 4 ---------------------------------------------------------------------------

// k_m = a_m + b_m sin(2πu + φ_m) cos(2πv + ψ_m), with exact derivatives.
struct Manufactured {
  std::array<double, 4> a{}, b{}, phi{}, psi{};

  KJet jet(double u, double v) const {
    KJet j;
    const double w = 2.0 * kPi;
    for (std::size_t m = 0; m < 4; ++m) {
      const double su = std::sin(w * u + phi[m]), cu = std::cos(w * u + phi[m]);
      const double sv = std::sin(w * v + psi[m]), cv = std::cos(w * v + psi[m]);
      j.k[m] = a[m] + b[m] * su * cv;
      j.ku[m] = b[m] * w * cu * cv;
      j.kv[m] = -b[m] * w * su * sv;
      j.kuu[m] = -b[m] * w * w * su * cv;
      j.kvv[m] = -b[m] * w * w * su * cv;
      j.kuv[m] = -b[m] * w * w * cu * sv;
    }
    return j;
  }
};

Check generic_branch(std::string& detail) {
  Check c;
  double exact_worst = 0, rmin = 1e300, rmax = 0;
  for (SystemId sys : kAllSystems) {
    const double eps = system_epsilon(sys);
    const bool centred = sys == SystemId::cpk1 || sys == SystemId::cpk2 || sys == SystemId::kh;
    const double t = centred ? 0.2 : 1.0, s = 0.3;
    if (sys != SystemId::constrab && sys != SystemId::kh3) {
      std::array<double, 4> k = constant_solution(sys);
      const GenericSample gs = generic_sample(sys, KJet::constant(k), s, t);
      exact_worst = std::max(exact_worst, max_abs(gauss_system_residual(gs.fs, eps)));
    }
    Manufactured m;
    m.a = {sys == SystemId::kh ? 1.1 : 0.6, 0.15, 0.3, -0.2};
    m.b = {0.2, 0.1, 0.15, 0.1};
    m.phi = {0.3, 1.1, -0.4, 0.7};
    m.psi = {-0.2, 0.5, 0.9, 0.1};
    if (field_count(sys) == 2) m.a[2] = m.a[3] = m.b[2] = m.b[3] = 0.0;
    const std::vector<double> exact = gauss_system_residual(generic_sample(sys, m.jet(0.25, 0.5), s, t).fs, eps);
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
      KFields f = make_fields(sys, n, n, Boundary::periodic);
      fill(f, [&](double u, double v) { return m.jet(u, v).k; });
      const auto fd = gauss_system_residual(generic_sample(sys, fd_jet(f, n / 4, n / 2), s, t).fs, eps);
      double e = 0;
      for (std::size_t i = 0; i < fd.size(); ++i) e = std::max(e, std::abs(fd[i] - exact[i]));
      err.push_back(e);
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
      const double ratio = err[i - 1] / err[i];
      rmin = std::min(rmin, ratio);
      rmax = std::max(rmax, ratio);
      c.require(ratio > 3.2 && ratio < 4.8, std::string(to_string(sys)) + " FD ratio " + fmt("%.2f", ratio));
    }
  }
  c.require(exact_worst < 1e-12, "constant-k Gauss residual " + fmt("%.3g", exact_worst));
  detail = "constant-k Gauss residual " + fmt("%.1e", exact_worst) + ", FD ratio in [" + fmt("%.2f", rmin) + ", " +
           fmt("%.2f", rmax) + "] over 7 systems";
  return c;
}

// ---- 5 ---------------------------------------------------------------------------

Check newton(std::string& detail) {
  Check c;
  KFields f = make_fields(SystemId::cpk2, 32, 32, Boundary::periodic);
  const double k1 = 0.5 * std::log(2.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  fill(f, [&](double, double) { return std::array<double, 4>{k1 + noise(rng), noise(rng), 0, 0}; });
  const NewtonResult r = newton_iterate(f);
  c.require(r.converged && r.residual < 1e-10, "residual " + fmt("%.3g", r.residual));
  c.require(r.iterations <= 25, "iterations " + std::to_string(r.iterations));

  double worst = 0;
  for (SystemId sys : kAllSystems) {
    std::mt19937 jr(static_cast<unsigned>(sys) + 40);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    KFields g = make_fields(sys, 8, 8, Boundary::periodic);
    const double base = sys == SystemId::kh ? 1.1 : 0.6;
    fill(g, [&](double, double) { return std::array<double, 4>{base + U(jr), U(jr), U(jr), U(jr)}; });
    const UnknownMap map = unknown_map(g);
    const Eigen::MatrixXd J = Eigen::MatrixXd(linearize(g, map).jacobian);
    const double h = 1e-6;
    for (std::size_t col = 0; col < map.count; ++col) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.count));
      e[static_cast<Eigen::Index>(col)] = 1.0;
      KFields fp = g, fm = g;
      apply_step(fp, map, e, h);
      apply_step(fm, map, e, -h);
      const Eigen::VectorXd fd = (residual_vector(fp, map) - residual_vector(fm, map)) / (2 * h);
      const Eigen::VectorXd an = J.col(static_cast<Eigen::Index>(col));
      worst = std::max(worst, (fd - an).norm() / std::max(1.0, an.norm()));
    }
  }
  c.require(worst < 1e-6, "Jacobian mismatch " + fmt("%.3g", worst));
  detail = "cpk2 32x32 residual " + fmt("%.1e", r.residual) + " in " + std::to_string(r.iterations) +
           " iterations, Jacobian rel. error " + fmt("%.1e", worst);
  return c;
}

// ---- 6 ---------------------------------------------------------------------------

ReconstructionGrid cube(const Point4& lo, double side, int n) {
  return ReconstructionGrid::box(lo, {lo[0] + side, lo[1] + side, lo[2] + side, lo[3] + side}, {n, n, n, n});
}

Check frame_integration(std::string& detail) {
  Check c;
  const CaseId& cs = find_case("cp1");
  const Immersion imm = build_immersion(cs, default_block(cs.block));
  const FrameModel m = immersion_model(imm);

  const auto grid = cube({0.2, 0.5, 0.3, 0.3}, 0.125, 9);
  const FrameState init = standard_frame(m.ambient);
  const DiscreteImmersion d = integrate_frame(m, grid, init);
  const AlignmentError align = alignment_error(d, imm, alignment(init, reference_frame(imm, grid.origin), 1));
  c.require(align.max < 1e-5, "alignment error " + fmt("%.3g", align.max));

  const Point4 p0{0.2, 0.5, 0.3, 0.3};
  const double side = 0.4;
  const Point4 p1{p0[0] + side, p0[1] + side, p0[2] + side, p0[3] + side};
  std::vector<double> errs;
  for (int n : {9, 17, 33})
    errs.push_back(
        euclidean_norm(integrate_path(m, cube(p0, side, n), reference_frame(imm, p0), {0, 1, 2, 3}).F() - imm.value(p1)));
  const double order = std::log2(errs[1] / errs[2]);
  c.require(std::abs(order - 4.0) < 0.3, "endpoint order " + fmt("%.2f", order));

  // Solved cpk2 fields against the same fields with k2 shifted by 0.1.
  KFields f = make_fields(SystemId::cpk2, 64, 64, Boundary::periodic);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  const double k1 = 0.5 * std::log(2.0);
  fill(f, [&](double, double) { return std::array<double, 4>{k1 + noise(rng), noise(rng), 0, 0}; });
  const KFields solved = newton_solve(f).fields;
  KFields corrupted = solved;
  for (auto& x : corrupted.k[1]) x += 0.1;
  const CoordinateBox b = default_box(SystemId::cpk2);
  std::vector<double> good, bad;
  for (int n : {5, 9, 17}) {
    const auto g = ReconstructionGrid::box({b.t0, b.s0, 0, 0}, {b.t0 + 0.4, b.s0 + 0.4, 0.5, 0.5}, {n, n, n, n});
    good.push_back(compatibility_check(generic_model(grid_source(solved)), g));
    bad.push_back(compatibility_check(generic_model(grid_source(corrupted)), g));
  }
  for (std::size_t i = 1; i < good.size(); ++i) {
    c.require(good[i - 1] / good[i] > 12.0, "solved compatibility ratio " + fmt("%.2f", good[i - 1] / good[i]));
    c.require(std::abs(bad[i] / bad[i - 1] - 1.0) < 0.05, "corrupted compatibility did not plateau");
  }
  c.require(bad.back() > 1e-2, "corrupted plateau " + fmt("%.3g", bad.back()));
  detail = "cp1 alignment " + fmt("%.1e", align.max) + ", endpoint order " + fmt("%.2f", order) +
           ", cpk2 compatibility " + fmt("%.1e", good.front()) + " -> " + fmt("%.1e", good.back()) +
           ", corrupted plateau " + fmt("%.3f", bad.back());
  return c;
}

// ---- 7 ---------------------------------------------------------------------------

Check holomorphic(std::string& detail) {
  Check c;
  double kahler = 0, minimality = 0;
  for (const char* which : {"u", "u2", "exp"}) {
    const VerificationReport rep = verify_immersion(holomorphic_block(which).imm, 9);
    kahler = std::max(kahler, rep.get("kahler_max"));
    minimality = std::max(minimality, rep.get("minimality_max"));
    c.require(rep.failures.empty(), std::string("f = ") + which + " reported failures");
  }
  c.require(kahler < 1e-8, "kahler " + fmt("%.3g", kahler));
  c.require(minimality < 1e-8, "mean curvature " + fmt("%.3g", minimality));
  detail = "f in {u, u^2, e^u}: kahler " + fmt("%.1e", kahler) + ", mean curvature " + fmt("%.1e", minimality);
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Check(std::string&)>>> criteria = {
      {"catalog atlas", catalog_atlas},
      {"canonicalization", canonicalization},
      {"exact k-solutions", exact_k_solutions},
      {"generic branch end to end", generic_branch},
      {"Newton solver", newton},
      {"frame integration", frame_integration},
      {"holomorphic correspondence", holomorphic},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    Check c;
    try {
      c = criteria[i].second(detail);
    } catch (const std::exception& e) {
      c.ok = false;
      c.why = std::string("threw ") + e.what();
    }
    failed += !c.ok;
    std::printf("%s %zu %s: %s\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first,
                c.ok ? detail.c_str() : c.why.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
