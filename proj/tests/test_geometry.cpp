#include <gtest/gtest.h>

#include <random>

#include "slag/cubic.hpp"
#include "slag/fundamental.hpp"
#include "slag/immersion.hpp"

using namespace slag;

namespace {

CVector cv(std::vector<cplx> z, int sig = 0) { return CVector{std::move(z), sig}; }

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

}  // namespace

TEST(Hermitian, Examples) {
  EXPECT_EQ(hermitian_product(cv({1, 0}), cv({1, 0})), cplx(1, 0));
  EXPECT_EQ(hermitian_product(cv({1, 0}), cv({0, 1})), cplx(0, 0));
  EXPECT_EQ(hermitian_product(cv({1, 0, 0}, 1), cv({1, 0, 0}, 1)), cplx(-1, 0));
  EXPECT_THROW(hermitian_product(cv({1, 0}), cv({1, 0, 0})), Error);
}

TEST(ApplyJ, Examples) {
  EXPECT_EQ(apply_J(cv({1, 0})).z, (std::vector<cplx>{{0, 1}, {0, 0}}));
  EXPECT_EQ(apply_J(cv({{0, 1}, 0})).z, (std::vector<cplx>{{-1, 0}, {0, 0}}));
  EXPECT_EQ(apply_J(cv({{1, 2}, 3})).z, (std::vector<cplx>{{-2, 1}, {0, 3}}));
}

TEST(ApplyJ, IsometryOnRandomPairs) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ud(-1, 1);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    CVector a, b;
    for (int i = 0; i < 5; ++i) {
      a.z.push_back({ud(rng), ud(rng)});
      b.z.push_back({ud(rng), ud(rng)});
    }
    worst = std::max(worst, std::abs(real_product(apply_J(a), apply_J(b)) - real_product(a, b)));
    const CVector jj = apply_J(apply_J(a));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(jj[i], -a[i]);
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Jet, FlatAndCircle) {
  auto flat = make_immersion("flat", 4, AmbientSpace::flat(4), LiftMode::none, Box{{-1, -1, -1, -1}, {1, 1, 1, 1}},
                             [](auto p) {
                               using T = typename decltype(p)::value_type;
                               return CxVec<T>{Cx<T>(p[0]), Cx<T>(p[1]), Cx<T>(p[2]), Cx<T>(p[3])};
                             });
  const std::vector<double> pt{0.1, 0.2, 0.3, 0.4};
  const Jet2 j = evaluate_jet(flat, pt);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) EXPECT_EQ(j.d1[i][k], cplx(i == k ? 1.0 : 0.0, 0.0));
  for (const auto& v : j.d2_packed)
    for (const auto& c : v.z) EXPECT_EQ(c, cplx(0, 0));
  EXPECT_TRUE(induced_metric(j).isApprox(Eigen::MatrixXd::Identity(4, 4)));
  EXPECT_EQ(kahler_form_restriction(j).cwiseAbs().maxCoeff(), 0.0);
  const auto sf = second_fundamental_A(j, AmbientSpace::flat(4), LiftMode::none);
  EXPECT_EQ(sf.c.max_abs(), 0.0);
  EXPECT_THROW(evaluate_jet(flat, std::vector<double>{2, 0, 0, 0}), Error);

  auto circle = make_immersion("circle", 1, AmbientSpace::flat(1), LiftMode::none, Box{{-1}, {1}}, [](auto p) {
    using T = typename decltype(p)::value_type;
    return CxVec<T>{expi(p[0])};
  });
  const Jet2 c = evaluate_jet(circle, std::vector<double>{0.0});
  EXPECT_NEAR(std::abs(c.d1[0][0] - cplx(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c.d2(0, 0)[0] - cplx(-1, 0)), 0.0, 1e-15);
}

TEST(Jet, QuadraticIsExactAndMatchesFd) {
  auto q = make_immersion("quad", 2, AmbientSpace::flat(2), LiftMode::none, Box{{-2, -2}, {2, 2}}, [](auto p) {
    using T = typename decltype(p)::value_type;
    return CxVec<T>{Cx<T>(p[0] * p[1], p[0] * p[0]), Cx<T>(3.0 * p[1] * p[1], p[0])};
  });
  const std::vector<double> pt{0.7, -1.3};
  const Jet2 j = evaluate_jet(q, pt);
  EXPECT_NEAR(std::abs(j.d1[0][0] - cplx(-1.3, 1.4)), 0, 1e-14);
  EXPECT_NEAR(std::abs(j.d1[1][1] - cplx(-7.8, 0)), 0, 1e-14);
  EXPECT_NEAR(std::abs(j.d2(0, 1)[0] - cplx(1, 0)), 0, 1e-14);
  EXPECT_NEAR(std::abs(j.d2(0, 0)[0] - cplx(0, 2)), 0, 1e-14);
  EXPECT_NEAR(std::abs(j.d2(1, 1)[1] - cplx(6, 0)), 0, 1e-14);
  const Jet2 f = fd_jet(q, pt);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(std::abs(j.d2(a, b)[k] - f.d2(a, b)[k]), 0, 1e-6);
}

TEST(Kahler, ComplexLineIsNotLagrangian) {
  auto line = make_immersion("cline", 2, AmbientSpace::flat(2), LiftMode::none, Box{{-1, -1}, {1, 1}}, [](auto p) {
    using T = typename decltype(p)::value_type;
    return CxVec<T>{Cx<T>(p[0], p[1]), Cx<T>(0.0)};
  });
  const Jet2 j = evaluate_jet(line, std::vector<double>{0.2, 0.1});
  EXPECT_NEAR(std::abs(kahler_form_restriction(j)(0, 1)), 1.0, 1e-15);
  try {
    second_fundamental_A(j, AmbientSpace::flat(2), LiftMode::none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonLagrangian);
  }
}

TEST(Minimality, Examples) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_EQ(minimality_residual(id, CubicTensor(4)), 0.0);
  EXPECT_EQ(minimality_residual(id, canonical_pattern(1.7)), 0.0);
  CubicTensor c(4);
  c.at(0, 0, 0) = 1.0;
  EXPECT_EQ(minimality_residual(id, c), 1.0);
}

TEST(Canonicalize, IdentityPattern) {
  const auto f = canonicalize_cubic(Eigen::MatrixXd::Identity(4, 4), canonical_pattern(1.0));
  EXPECT_NEAR(f.r, 1.0, 1e-14);
  EXPECT_LT(f.shape_residual, 1e-14);
  EXPECT_NEAR(std::abs(f.frame.determinant()), 1.0, 1e-14);
}

TEST(Canonicalize, RandomRotationsKeepR) {
  std::mt19937_64 rng(42);
  for (double r : {0.5, 1.0, 2.0})
    for (int t = 0; t < 100; ++t) {
      const Eigen::Matrix4d q = random_rotation(rng);
      // Evaluating C on the columns of Qᵀ conjugates it.
      const CubicTensor c = canonical_pattern(r).transformed(q.transpose());
      const auto f = canonicalize_cubic(Eigen::MatrixXd::Identity(4, 4), c);
      EXPECT_NEAR(f.r, r, 1e-8);
      EXPECT_LT(f.shape_residual, 1e-10);
    }
}

TEST(Canonicalize, NonIdentityMetric) {
  Eigen::MatrixXd g(4, 4);
  g << 2, 0.3, 0, 0.1, 0.3, 1, 0.2, 0, 0, 0.2, 3, 0, 0.1, 0, 0, 1.5;
  // C written in coordinates so that on a g-orthonormal frame it is pattern r = 0.8.
  const Eigen::MatrixXd e = orthonormalizer(g);
  const CubicTensor c = canonical_pattern(0.8).transformed(e.inverse());
  const auto f = canonicalize_cubic(g, c);
  EXPECT_NEAR(f.r, 0.8, 1e-12);
  EXPECT_TRUE((f.frame.transpose() * g * f.frame).isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-12));
}

TEST(Canonicalize, Errors) {
  try {
    canonicalize_cubic(Eigen::MatrixXd::Identity(4, 4), CubicTensor(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateCubic);
  }
  CubicTensor c(4);
  c.set_sym(0, 0, 0, 1.0);
  c.set_sym(1, 1, 1, 1.0);
  c.set_sym(2, 2, 2, 1.0);
  try {
    canonicalize_cubic(Eigen::MatrixXd::Identity(4, 4), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongSymmetryType);
  }
}

TEST(Symmetry, Generators) {
  const auto gens = SymmetryGenerators::standard();
  for (const auto& m : gens.all()) {
    EXPECT_LT((m.transpose() * m - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-15);
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  const double r = 1.3;
  EXPECT_LT(symmetry_residual(id, canonical_pattern(r), gens), 1e-12);

  // Direct tensor transform oracle: C(γX,γX,γX) on span{X₁,X₂} is r cos 3θ.
  auto single = [&](double angle) {
    SymmetryGenerators g;
    g.s3_rotation = SymmetryGenerators::plane_rotation(0, 1, angle);
    g.s3_reflection = Eigen::Matrix4d::Identity();
    return symmetry_residual(id, canonical_pattern(r), g);
  };
  EXPECT_NEAR(single(2.0 * std::numbers::pi / 3.0), 0.0, 1e-12);
  EXPECT_NEAR(single(std::numbers::pi / 2.0), r, 1e-12);
  EXPECT_NEAR(single(std::numbers::pi / 3.0), 2.0 * r, 1e-12);
}

TEST(Cubic, SymmetrizeAndTransform) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-1, 1);
  CubicTensor c(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) c.at(i, j, k) = ud(rng);
  c.symmetrize();
  EXPECT_LT(c.asymmetry(), 1e-15);
  const Eigen::Matrix4d q = random_rotation(rng);
  const CubicTensor back = c.transformed(q).transformed(q.transpose());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) EXPECT_NEAR(back(i, j, k), c(i, j, k), 1e-13);
}
