#include <gtest/gtest.h>

#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>

#include "slag/kfield/fields.hpp"
#include "slag/kfield/solver.hpp"

using namespace slag;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Configuration;
}

std::string message_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// (s, t) points inside each system's branch domain.
std::vector<std::pair<double, double>> sample_points(SystemId sys) {
  const bool centred = sys == SystemId::cpk1 || sys == SystemId::cpk2 || sys == SystemId::kh;
  const double t0 = centred ? 0.0 : 0.8;
  return {{0.3, t0 + 0.2}, {-0.4, t0 - 0.3}, {1.0, t0 + 0.45}, {0.05, t0}};
}

// k_m = a_m + b_m sin(2πu + φ_m) cos(2πv + ψ_m): periodic on the unit square,
// with exact derivatives.
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
  KFields grid(SystemId sys, int n) const {
    KFields f = make_fields(sys, n, n, Boundary::periodic);
    fill(f, [&](double u, double v) { return jet(u, v).k; });
    return f;
  }
};

Manufactured manufactured(SystemId sys) {
  Manufactured m;
  m.a = {sys == SystemId::kh ? 1.1 : 0.6, 0.15, 0.3, -0.2};
  m.b = {0.2, 0.1, 0.15, 0.1};
  m.phi = {0.3, 1.1, -0.4, 0.7};
  m.psi = {-0.2, 0.5, 0.9, 0.1};
  if (field_count(sys) == 2) m.a[2] = m.a[3] = m.b[2] = m.b[3] = 0.0;
  return m;
}

// Random jet that satisfies the system at the point: k₄'s first derivatives
// and kvv of k₁, k₂ are solved for.
KJet solving_jet(SystemId sys, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-0.4, 0.4);
  KJet j;
  for (std::size_t m = 0; m < 4; ++m) {
    j.k[m] = U(rng);
    j.ku[m] = U(rng);
    j.kv[m] = U(rng);
    j.kuu[m] = U(rng);
    j.kuv[m] = U(rng);
    j.kvv[m] = U(rng);
  }
  j.k[0] += sys == SystemId::kh ? 1.2 : 0.5;
  if (field_count(sys) == 2) j.k[2] = j.k[3] = 0.0;
  if (field_count(sys) == 4) {
    // Residuals are affine in (∂u k₄, ∂v k₄) with unit coefficients.
    KPoint<double> p{j.k, j.ku, j.kv};
    const std::array<double, 4> lap{};
    j.ku[3] = 0.0;
    j.kv[3] = 0.0;
    p.ku = j.ku;
    p.kv = j.kv;
    const auto r = pointwise_residual(sys, p, lap);
    j.ku[3] = -r[0];
    j.kv[3] = -r[1];
  }
  const auto rhs = laplacian_rhs(sys, j.k);
  for (std::size_t m = 0; m < 2; ++m) j.kvv[m] = rhs[m] - j.kuu[m];
  return j;
}

std::vector<int> signs_of(SystemId sys) { return z_singular(sys) ? std::vector<int>{1, -1} : std::vector<int>{1}; }

}  // namespace

// ---- closed forms -----------------------------------------------------------

TEST(ClosedForm, FlatZeroFieldAtUnitT) {
  const auto [c, g] = closed_form_fields(SystemId::constraa, KJet::constant({0, 0, 0, 0}), 0.0, 1.0);
  EXPECT_NEAR(c.a3, -1.0, 1e-15);
  EXPECT_NEAR(c.a2, 0.0, 1e-15);
  EXPECT_NEAR(c.b2, 0.0, 1e-15);
  EXPECT_NEAR(c.r, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.mu, 1.0, 1e-15);
}

TEST(ClosedForm, ProjectiveSingularBranchAtQuarterPi) {
  const double k2 = 0.3;
  const auto [c, g] = closed_form_fields(SystemId::cpk2, KJet::constant({0.1, k2, 0, 0}), 0.2, kPi / 4);
  EXPECT_NEAR(c.a3, 1.0, 1e-14);
  EXPECT_NEAR(c.r, std::sqrt(2.0) * std::exp(k2), 1e-14);
  EXPECT_NEAR(c.a2, 0.0, 1e-15);
  EXPECT_NEAR(c.b2, std::sqrt(1.0 + c.a3 * c.a3), 1e-14);
  EXPECT_NEAR(c.c6, c.a3, 0.0);
  EXPECT_EQ(c.d6, 0.0);
}

TEST(ClosedForm, HyperbolicA3VanishesAtZeroT) {
  const auto [c, g] = closed_form_fields(SystemId::kh, KJet::constant({1.0, 0.0, 0.1, 0.2}), 0.3, 0.0);
  EXPECT_EQ(c.a3, 0.0);
  EXPECT_EQ(g.eps_tilde, -1.0);
}

TEST(ClosedForm, A3PerSystem) {
  const double t = 0.7;
  const std::vector<std::pair<SystemId, double>> expect = {
      {SystemId::constraa, -1.0 / t}, {SystemId::constrab, -1.0 / t},        {SystemId::cpk1, std::tan(t)},
      {SystemId::cpk2, std::tan(t)},  {SystemId::kh, -std::tanh(t)},         {SystemId::kh2, -1.0 / std::tanh(t)},
      {SystemId::kh3, -1.0 / std::tanh(t)}};
  for (const auto& [sys, a3] : expect)
    EXPECT_NEAR(closed_form_fields(sys, KJet::constant({0.4, 0.1, 0.2, 0.3}), 0.2, t).first.a3, a3, 1e-14)
        << to_string(sys);
}

TEST(ClosedForm, SingularSignSelectsB2) {
  const KJet k = KJet::constant({0.2, 0.1, 0, 0});
  const double t = 0.6;
  // Flat: the "+" formulas belong to b₂ = a₃.
  EXPECT_NEAR(closed_form_fields(SystemId::constrab, k, 0.3, t, +1).first.b2, -1.0 / t, 1e-14);
  EXPECT_NEAR(closed_form_fields(SystemId::constrab, k, 0.3, t, -1).first.b2, 1.0 / t, 1e-14);
  // Curved: "+" is b₂ = +√(ε + a₃²).
  EXPECT_NEAR(closed_form_fields(SystemId::cpk2, k, 0.3, t, +1).first.b2, 1.0 / std::cos(t), 1e-14);
  EXPECT_NEAR(closed_form_fields(SystemId::kh3, k, 0.3, t, -1).first.b2, -1.0 / std::sinh(t), 1e-14);
  // b₆ carries the same sign as the phase of w.
  const auto plus = closed_form_fields(SystemId::cpk2, k, 0.3, t, +1).first;
  const auto minus = closed_form_fields(SystemId::cpk2, k, 0.3, t, -1).first;
  EXPECT_NEAR(plus.b6, -minus.b6, 1e-15);
  EXPECT_NEAR(plus.a6, minus.a6, 1e-15);
  EXPECT_EQ(code_of([&] { closed_form_fields(SystemId::cpk2, k, 0.3, t, 0); }), ErrorCode::Configuration);
}

TEST(ClosedForm, DenominatorsAreGuarded) {
  // cos 2s + cosh 2k₁ = 0 at k₁ = 0, s = π/2.
  EXPECT_EQ(code_of([] { closed_form_fields(SystemId::cpk1, KJet::constant({0, 0, 0, 0}), kPi / 2, 0.1); }),
            ErrorCode::SingularPoint);
  EXPECT_EQ(code_of([] { closed_form_fields(SystemId::kh, KJet::constant({kPi / 2, 0, 0, 0}), 0.0, 0.1); }),
            ErrorCode::SingularPoint);
  EXPECT_EQ(code_of([] { closed_form_fields(SystemId::constraa, KJet::constant({0.3, 0, 0, 0}), 0.1, 0.0); }),
            ErrorCode::SingularPoint);
  EXPECT_EQ(code_of([] { closed_form_fields(SystemId::kh2, KJet::constant({0.3, 0, 0, 0}), 0.1, -0.5); }),
            ErrorCode::SingularPoint);
  EXPECT_EQ(code_of([] { closed_form_fields(SystemId::cpk2, KJet::constant({0.3, 0, 0, 0}), 0.1, kPi / 2); }),
            ErrorCode::SingularPoint);
}

class Systems : public ::testing::TestWithParam<SystemId> {};

TEST_P(Systems, NormalisationConstantIsConstant) {
  const SystemId sys = GetParam();
  const Manufactured m = manufactured(sys);
  for (int sg : signs_of(sys)) {
    const double expect = sys == SystemId::kh ? -1.0 : 1.0;
    for (const auto& [s, t] : sample_points(sys))
      for (double u : {0.1, 0.7}) {
        const GaugeFields g = closed_form_fields(sys, m.jet(u, 0.3), s, t, sg).second;
        EXPECT_NEAR(g.H_const, expect, 1e-12) << to_string(sys);
        EXPECT_GT(std::abs(g.rho), 0.0);
      }
  }
}

TEST_P(Systems, ConstantSolutionsSatisfyGaussAndCodazziExactly) {
  const SystemId sys = GetParam();
  std::array<double, 4> c;
  if (sys == SystemId::constrab || sys == SystemId::kh3) GTEST_SKIP() << "no constant solution";
  c = constant_solution(sys);
  if (sys == SystemId::kh2 || sys == SystemId::constraa) c[0] = 0.0;  // the b₂ = 0 representatives
  const double eps = system_epsilon(sys);
  for (const auto& [s, t] : sample_points(sys)) {
    if (sys == SystemId::kh && std::abs(s) < 0.1) continue;  // cosh 2s + cos π = 0 at s = 0
    const GenericSample gs = generic_sample(sys, KJet::constant(c), s, t);
    EXPECT_LT(max_abs(gauss_system_residual(gs.fs, eps)), 1e-12) << to_string(sys);
    EXPECT_LT(max_abs(codazzi_residual(gs.fs)), 1e-12);
    EXPECT_LT(max_abs(frame_gauss_residual(gs.fs, eps)), 1e-12);
    EXPECT_LT(gs.bracket_residual, 1e-12);
  }
}

TEST_P(Systems, SystemAtAPointIsExactlyTheRemainingCompatibility) {
  // Jets satisfying the k-system at a point make every Gauss and Codazzi
  // component and every coordinate bracket vanish there, on both branches.
  const SystemId sys = GetParam();
  const double eps = system_epsilon(sys);
  std::mt19937 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const KJet j = solving_jet(sys, rng);
    for (int sg : signs_of(sys))
      for (const auto& [s, t] : sample_points(sys)) {
        const GenericSample gs = generic_sample(sys, j, s, t, sg);
        EXPECT_LT(max_abs(gauss_system_residual(gs.fs, eps)), 1e-9) << to_string(sys);
        EXPECT_LT(max_abs(codazzi_residual(gs.fs)), 1e-11);
        EXPECT_LT(gs.bracket_residual, 1e-11);
      }
  }
}

TEST_P(Systems, ViolatingTheSystemIsDetected) {
  const SystemId sys = GetParam();
  std::mt19937 rng(12);
  KJet j = solving_jet(sys, rng);
  j.kvv[1] += 0.5;  // Δk₂ off by 0.5
  const auto [s, t] = sample_points(sys)[0];
  const GenericSample gs = generic_sample(sys, j, s, t);
  const double worst = std::max(max_abs(gauss_system_residual(gs.fs, system_epsilon(sys))), gs.bracket_residual);
  EXPECT_GT(worst, 1e-3) << to_string(sys);
  // Codazzi does not involve second derivatives of k.
  EXPECT_LT(max_abs(codazzi_residual(gs.fs)), 1e-11);
}

TEST_P(Systems, DisplayedA1B1AgreeWithCodazzi) {
  // a₁ = X₂(r)/3r and b₁ = −X₁(r)/3r by the first Codazzi equation.
  const SystemId sys = GetParam();
  const Manufactured m = manufactured(sys);
  for (int sg : signs_of(sys))
    for (const auto& [s, t] : sample_points(sys)) {
      const GenericSample gs = generic_sample(sys, m.jet(0.2, 0.6), s, t, sg);
      const double r = gs.fs.c.r;
      EXPECT_NEAR(gs.fs.c.a1, gs.fs.X(1, Coef::r) / (3 * r), 1e-12) << to_string(sys);
      EXPECT_NEAR(gs.fs.c.b1, -gs.fs.X(0, Coef::r) / (3 * r), 1e-12) << to_string(sys);
    }
}

TEST_P(Systems, FiniteDifferenceJetsConvergeAtSecondOrder) {
  // Gauss residual with central-difference (u, v) derivatives against the
  // same residual with exact derivatives, on a manufactured field.
  const SystemId sys = GetParam();
  const Manufactured m = manufactured(sys);
  const auto [s, t] = sample_points(sys)[0];
  const double eps = system_epsilon(sys);
  const std::vector<double> exact = gauss_system_residual(generic_sample(sys, m.jet(0.25, 0.5), s, t).fs, eps);
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const KFields f = m.grid(sys, n);
    const std::vector<double> fd = gauss_system_residual(generic_sample(sys, fd_jet(f, n / 4, n / 2), s, t).fs, eps);
    double e = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) e = std::max(e, std::abs(fd[i] - exact[i]));
    err.push_back(e);
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ratio = err[i] / err[i + 1];
    EXPECT_GT(ratio, 3.2) << to_string(sys);
    EXPECT_LT(ratio, 4.8) << to_string(sys);
  }
}

TEST_P(Systems, DiscreteResidualConvergesToContinuumResidual) {
  const SystemId sys = GetParam();
  const Manufactured m = manufactured(sys);
  const KJet j = m.jet(0.25, 0.5);
  const KPoint<double> p{j.k, j.ku, j.kv};
  std::array<double, 4> lap;
  for (std::size_t a = 0; a < 4; ++a) lap[a] = j.kuu[a] + j.kvv[a];
  const std::vector<double> exact = pointwise_residual(sys, p, lap);
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const KFields f = m.grid(sys, n);
    const ResidualGrid g = constraint_residual(f);
    double e = 0.0;
    for (std::size_t q = 0; q < exact.size(); ++q) e = std::max(e, std::abs(g.at(f.index(n / 4, n / 2), q) - exact[q]));
    err.push_back(e);
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    EXPECT_GT(err[i] / err[i + 1], 3.2) << to_string(sys);
    EXPECT_LT(err[i] / err[i + 1], 4.8) << to_string(sys);
  }
}

TEST_P(Systems, AnalyticJacobianMatchesFiniteDifferences) {
  const SystemId sys = GetParam();
  std::mt19937 rng(static_cast<unsigned>(sys) + 40);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  for (Boundary bc : {Boundary::periodic, Boundary::dirichlet}) {
    KFields f = make_fields(sys, 8, 8, bc);
    const double base = sys == SystemId::kh ? 1.1 : 0.6;
    fill(f, [&](double, double) { return std::array<double, 4>{base + U(rng), U(rng), U(rng), U(rng)}; });
    const UnknownMap map = unknown_map(f);
    const Eigen::MatrixXd J = Eigen::MatrixXd(linearize(f, map).jacobian);
    const double h = 1e-6;
    for (std::size_t col = 0; col < map.count; ++col) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.count));
      e[static_cast<Eigen::Index>(col)] = 1.0;
      KFields fp = f, fm = f;
      apply_step(fp, map, e, h);
      apply_step(fm, map, e, -h);
      const Eigen::VectorXd fd = (residual_vector(fp, map) - residual_vector(fm, map)) / (2 * h);
      const Eigen::VectorXd an = J.col(static_cast<Eigen::Index>(col));
      EXPECT_LT((fd - an).norm(), 1e-6 * std::max(1.0, an.norm())) << to_string(sys) << " column " << col;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, Systems, ::testing::ValuesIn(kAllSystems),
                         [](const auto& info) { return std::string(to_string(info.param)); });

// ---- discrete residual ------------------------------------------------------

TEST(ConstraintResidual, ExactConstantSolutionsOnAnyGrid) {
  const std::vector<std::pair<SystemId, std::array<double, 4>>> cases = {
      {SystemId::cpk2, {0.5 * std::log(2.0), 0.0, 0.0, 0.0}},
      {SystemId::constraa, {0.0, 0.0, 0.0, 0.0}},
      {SystemId::kh, {kPi / 2, 0.0, 0.0, 0.0}}};
  for (const auto& [sys, k] : cases)
    for (int n : {5, 8, 13})
      for (Boundary bc : {Boundary::periodic, Boundary::dirichlet}) {
        KFields f = make_fields(sys, n, n + 2, bc);
        fill(f, [&](double, double) { return k; });
        EXPECT_LT(constraint_residual(f).max_abs(), 1e-12) << to_string(sys) << " n=" << n;
      }
}

TEST(ConstraintResidual, ProjectiveFourFieldFamily) {
  for (double c : {0.2, 0.5, 1.0}) {
    const double k2 = 0.5 * std::log(std::cosh(2 * c));
    const double mod = std::sqrt(2.0 * std::cbrt(2.0) * std::exp(-2 * k2 / 3));
    KFields f = make_fields(SystemId::cpk1, 6, 6, Boundary::periodic);
    fill(f, [&](double, double) { return std::array<double, 4>{c, k2, mod * 0.6, mod * 0.8}; });
    EXPECT_LT(constraint_residual(f).max_abs(), 1e-12);
  }
}

TEST(ConstraintResidual, SmallGridsAreRejected) {
  const KFields f = make_fields(SystemId::cpk2, 4, 8, Boundary::periodic);
  EXPECT_EQ(code_of([&] { constraint_residual(f); }), ErrorCode::Configuration);
}

TEST(ConstraintResidual, SingularNodesUseTheLimitForm) {
  // k₁ ≡ 0 with k₃ ∂k₁/∂u + k₄ ∂k₁/∂v = 0: finite, and flagged.
  KFields f = make_fields(SystemId::constraa, 6, 6, Boundary::periodic);
  fill(f, [](double, double) { return std::array<double, 4>{0.0, 0.0, 0.3, 0.1}; });
  const ResidualGrid g = constraint_residual(f);
  EXPECT_EQ(g.limit_nodes.size(), f.nodes());
  EXPECT_LT(g.max_abs(), 1e-12);
}

TEST(ConstantSolutions, ObstructionsAreReported) {
  EXPECT_EQ(code_of([] { constant_solution(SystemId::kh3); }), ErrorCode::NonConvergence);
  const std::string kh3 = message_of([] { constant_solution(SystemId::kh3); });
  EXPECT_NE(kh3.find("no constant solution"), std::string::npos);
  EXPECT_NE(kh3.find("e^{2k1} = -2"), std::string::npos) << kh3;
  const std::string flat = message_of([] { constant_solution(SystemId::constrab); });
  EXPECT_NE(flat.find("no constant solution"), std::string::npos) << flat;
  const auto c = constant_solution(SystemId::cpk2);
  EXPECT_NEAR(c[0], 0.5 * std::log(2.0), 1e-14);
  EXPECT_NEAR(c[1], 0.0, 1e-14);
}

TEST(ConstantSolutions, EverySolvableSystemHasZeroResidual) {
  for (SystemId sys : kAllSystems) {
    if (sys == SystemId::kh3 || sys == SystemId::constrab) continue;
    KFields f = make_fields(sys, 5, 5, Boundary::periodic);
    const auto c = constant_solution(sys);
    fill(f, [&](double, double) { return c; });
    EXPECT_LT(constraint_residual(f).max_abs(), 1e-12) << to_string(sys);
  }
}

// ---- Newton -----------------------------------------------------------------

namespace {
KFields perturbed_projective(int n, Boundary bc) {
  const auto c = constant_solution(SystemId::cpk2);
  KFields f = make_fields(SystemId::cpk2, n, n, bc);
  fill(f, [&](double u, double v) {
    auto x = c;
    x[0] += 0.01 * std::sin(2 * kPi * u) * std::sin(2 * kPi * v);
    return x;
  });
  return f;
}
}  // namespace

TEST(Newton, ProjectiveSingularSystemFromPerturbedConstant) {
  const NewtonResult r = newton_solve(perturbed_projective(32, Boundary::periodic));
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.residual, 1e-10);
  EXPECT_LE(r.iterations, 25);
  EXPECT_LT(constraint_residual(r.fields).max_abs(), 1e-10);
  ASSERT_GE(r.history.size(), 2u);
  EXPECT_GT(r.history.front().residual, 1e-3);
}

TEST(Newton, ZeroFlatFieldNeedsNoIteration) {
  const KFields f = make_fields(SystemId::constraa, 8, 8, Boundary::periodic);
  const NewtonResult r = newton_solve(f);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(Newton, IsDeterministicAcrossThreadCounts) {
  const KFields f = perturbed_projective(16, Boundary::periodic);
  ::setenv("SLAG_THREADS", "1", 1);
  const NewtonResult a = newton_solve(f);
  ::setenv("SLAG_THREADS", "3", 1);
  const NewtonResult b = newton_solve(f);
  ::unsetenv("SLAG_THREADS");
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].residual, b.history[i].residual);
  for (int m = 0; m < 4; ++m) EXPECT_EQ(a.fields.k[m], b.fields.k[m]);
}

TEST(Newton, DirichletFourFieldSystem) {
  // Boundary values held at a member of the constant family, interior perturbed.
  const auto c = constant_solution(SystemId::cpk1);
  KFields f = make_fields(SystemId::cpk1, 12, 12, Boundary::dirichlet);
  fill(f, [&](double u, double v) {
    auto x = c;
    const double bump = std::sin(kPi * u) * std::sin(kPi * v);
    for (std::size_t m = 0; m < 4; ++m) x[m] += 0.02 * bump;
    return x;
  });
  const NewtonResult r = newton_solve(f);
  EXPECT_LT(r.residual, 1e-10);
  for (int i = 0; i < f.nu; ++i) EXPECT_EQ(r.fields.at(2, i, 0), f.at(2, i, 0));
}

TEST(Newton, SolvedFieldsFeedTheStructureEquations) {
  // Central-difference jets of a discrete solution satisfy the system at the
  // node, so Gauss and Codazzi vanish to rounding there.
  const NewtonResult r = newton_solve(perturbed_projective(16, Boundary::periodic));
  for (int sg : {1, -1}) {
    const GenericSample gs = generic_sample(SystemId::cpk2, fd_jet(r.fields, 5, 9), 0.4, 0.3, sg);
    EXPECT_LT(max_abs(gauss_system_residual(gs.fs, 1.0)), 1e-8);
    EXPECT_LT(gs.bracket_residual, 1e-8);
  }
}

TEST(Newton, ExhaustedIterationsRaiseNonConvergence) {
  NewtonOptions opt;
  opt.max_iter = 1;
  KFields f = perturbed_projective(16, Boundary::periodic);
  for (auto& x : f.k[1]) x += 0.5;
  const std::string msg = message_of([&] { newton_solve(f, opt); });
  EXPECT_NE(msg.find("NonConvergence"), std::string::npos);
  EXPECT_NE(msg.find("final residual"), std::string::npos);
  const NewtonResult r = newton_iterate(f, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.history.size(), 2u);
}

TEST(Newton, DenormalK1StaysOnTheLimitForm) {
  KFields f = make_fields(SystemId::constraa, 6, 6, Boundary::periodic);
  fill(f, [](double, double) { return std::array<double, 4>{0.0, 0.0, 0.3, 0.1}; });
  f.at(0, 2, 2) = 5e-324;
  EXPECT_NO_THROW(linearize(f, unknown_map(f)));
  f.at(0, 3, 3) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code_of([&] { newton_solve(f); }), ErrorCode::Configuration);
}

TEST(Newton, NonFiniteJacobianEntriesNameTheNode) {
  KFields f = make_fields(SystemId::cpk2, 6, 6, Boundary::periodic);
  fill(f, [](double, double) { return std::array<double, 4>{0.1, 0.0, 0.0, 0.0}; });
  f.at(1, 4, 1) = 800.0;  // e^{2k₂} overflows
  const std::string msg = message_of([&] { linearize(f, unknown_map(f)); });
  EXPECT_NE(msg.find("SingularJacobian"), std::string::npos) << msg;
  EXPECT_NE(msg.find("(4, 1)"), std::string::npos) << msg;
}

// ---- degeneracy scan --------------------------------------------------------

TEST(Degeneracy, ZeroFlatFieldIsDegenerateEverywhere) {
  const KFields f = make_fields(SystemId::constraa, 5, 5, Boundary::periodic);
  const DegeneracyReport rep = degeneracy_scan(f);
  EXPECT_EQ(rep.count("b2=0"), f.nodes());
  const auto sum = rep.summary();
  EXPECT_NE(std::find(sum.begin(), sum.end(), "degenerate: b2=0 everywhere"), sum.end());
}

TEST(Degeneracy, ProjectiveConstantHasNoFlags) {
  KFields f = make_fields(SystemId::cpk2, 6, 6, Boundary::periodic);
  fill(f, [](double, double) { return std::array<double, 4>{0.5 * std::log(2.0), 0.0, 0.0, 0.0}; });
  EXPECT_TRUE(degeneracy_scan(f).empty());
}

TEST(Degeneracy, EmptyGridGivesEmptyReport) {
  const KFields f = make_fields(SystemId::cpk1, 0, 0, Boundary::periodic);
  const DegeneracyReport rep = degeneracy_scan(f);
  EXPECT_TRUE(rep.empty());
  EXPECT_EQ(rep.nodes, 0u);
}

TEST(Degeneracy, DenominatorInsideTheBox) {
  KFields f = make_fields(SystemId::cpk1, 5, 5, Boundary::periodic);
  fill(f, [](double u, double) { return std::array<double, 4>{u < 0.3 ? 0.0 : 0.4, 0.0, 0.0, 0.0}; });
  CoordinateBox box;
  box.s0 = 1.0;
  box.s1 = 2.0;  // contains π/2
  const DegeneracyReport rep = degeneracy_scan(f, box);
  EXPECT_EQ(rep.count("gauge denominator vanishes in box"), 10u);
  EXPECT_EQ(rep.count("b2=0"), 10u);
}

// ---- serialization ----------------------------------------------------------

TEST(KFieldsIo, CsvRoundTrip) {
  const KFields f = manufactured(SystemId::cpk1).grid(SystemId::cpk1, 7);
  std::istringstream in(fields_csv(f));
  const KFields g = read_fields_csv(in, SystemId::cpk1, Boundary::periodic);
  ASSERT_EQ(g.nu, 7);
  ASSERT_EQ(g.nv, 7);
  EXPECT_NEAR(g.hu, f.hu, 1e-15);
  for (int m = 0; m < 4; ++m) EXPECT_EQ(g.k[m], f.k[m]);
  EXPECT_EQ(fields_metadata(f)["layout"], "row-major, u fastest");
}

TEST(KFieldsIo, MalformedInputIsAConfigurationError) {
  std::istringstream bad("x,y\n1,2\n");
  EXPECT_EQ(code_of([&] { read_fields_csv(bad, SystemId::cpk2, Boundary::periodic); }), ErrorCode::Configuration);
  EXPECT_EQ(code_of([] { load_fields("/nonexistent/k.csv", SystemId::cpk2, Boundary::periodic); }),
            ErrorCode::Configuration);
}
