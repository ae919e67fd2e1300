// SPDX-License-Identifier: MIT
//
// Fully symmetric cubic forms, their canonical SO(2)⋊S₃ shape and the
// pointwise symmetry test.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "slag/error.hpp"

namespace slag {

using MetricMatrix = Eigen::MatrixXd;

class CubicTensor {
 public:
  CubicTensor() = default;
  explicit CubicTensor(int n) : n_(n), c_(static_cast<std::size_t>(n * n * n), 0.0) {}

  int dim() const { return n_; }
  double operator()(int i, int j, int k) const { return c_[idx(i, j, k)]; }
  double& at(int i, int j, int k) { return c_[idx(i, j, k)]; }

  /// Writes v into every permutation of (i,j,k).
  void set_sym(int i, int j, int k, double v) {
    at(i, j, k) = at(i, k, j) = at(j, i, k) = at(j, k, i) = at(k, i, j) = at(k, j, i) = v;
  }

  /// Averages over the six index permutations.
  void symmetrize() {
    CubicTensor s(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) {
          const double a = ((*this)(i, j, k) + (*this)(i, k, j) + (*this)(j, i, k) + (*this)(j, k, i) +
                            (*this)(k, i, j) + (*this)(k, j, i)) /
                           6.0;
          s.at(i, j, k) = a;
        }
    *this = s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Largest |C(i,j,k) − C(σ(i,j,k))| over permutations.
  double asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) {
          const double v = (*this)(i, j, k);
          for (double w : {(*this)(i, k, j), (*this)(j, i, k), (*this)(j, k, i), (*this)(k, i, j), (*this)(k, j, i)})
            m = std::max(m, std::abs(v - w));
        }
    return m;
  }

  /// C'(a,b,c) = Σ C(i,j,k) E(i,a) E(j,b) E(k,c): C evaluated on the columns of E.
  CubicTensor transformed(const Eigen::MatrixXd& e) const {
    const int m = static_cast<int>(e.cols());
    CubicTensor out(m);
    // Contract one index at a time.
    std::vector<double> a(static_cast<std::size_t>(m * n_ * n_), 0.0), b(static_cast<std::size_t>(m * m * n_), 0.0);
    for (int p = 0; p < m; ++p)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) {
          double s = 0.0;
          for (int i = 0; i < n_; ++i) s += e(i, p) * (*this)(i, j, k);
          a[static_cast<std::size_t>((p * n_ + j) * n_ + k)] = s;
        }
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        for (int k = 0; k < n_; ++k) {
          double s = 0.0;
          for (int j = 0; j < n_; ++j) s += e(j, q) * a[static_cast<std::size_t>((p * n_ + j) * n_ + k)];
          b[static_cast<std::size_t>((p * m + q) * n_ + k)] = s;
        }
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        for (int r = 0; r < m; ++r) {
          double s = 0.0;
          for (int k = 0; k < n_; ++k) s += e(k, r) * b[static_cast<std::size_t>((p * m + q) * n_ + k)];
          out.at(p, q, r) = s;
        }
    return out;
  }

  /// The shape operator matrix A_X for basis direction i in an orthonormal frame.
  Eigen::MatrixXd slice(int i) const {
    Eigen::MatrixXd a(n_, n_);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) a(j, k) = (*this)(i, j, k);
    return a;
  }

 private:
  std::size_t idx(int i, int j, int k) const { return static_cast<std::size_t>((i * n_ + j) * n_ + k); }
  int n_ = 0;
  std::vector<double> c_;
};

/// C(X₁,X₁,X₁) = r, C(X₁,X₂,X₂) = −r, every other independent entry zero.
inline CubicTensor canonical_pattern(double r, int n = 4) {
  CubicTensor c(n);
  c.set_sym(0, 0, 0, r);
  c.set_sym(0, 1, 1, -r);
  return c;
}

/// Columns E with Eᵀ g E = I (Gram–Schmidt in coordinate order).
inline Eigen::MatrixXd orthonormalizer(const MetricMatrix& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::DegenerateMetric, "metric is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  return l.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
}

struct CanonicalFrame {
  Eigen::MatrixXd frame;  // columns X₁…Xₙ in the input coordinate basis
  double r = 0.0;
  double shape_residual = 0.0;
  double angle = 0.0;  // rotation of X₁ inside N₁ relative to the eigenbasis, in [0, 2π/3)
  CubicTensor canonical;  // C expressed in the returned frame
};

inline double pattern_deviation(const CubicTensor& c, double r) {
  const CubicTensor p = canonical_pattern(r, c.dim());
  double m = 0.0;
  for (int i = 0; i < c.dim(); ++i)
    for (int j = 0; j < c.dim(); ++j)
      for (int k = 0; k < c.dim(); ++k) m = std::max(m, std::abs(c(i, j, k) - p(i, j, k)));
  return m;
}

/// Brings C into the canonical shape. Works for n = 2, 3, 4: the null space
/// of C is expected to have dimension n − 2.
inline CanonicalFrame canonicalize_cubic(const MetricMatrix& g, const CubicTensor& c, double null_tol = 1e-8,
                                         double shape_tol = 1e-6) {
  const int n = c.dim();
  if (g.rows() != n || g.cols() != n) throw Error(ErrorCode::DimensionMismatch, "metric and cubic sizes differ");
  const Eigen::MatrixXd e = orthonormalizer(g);
  const CubicTensor co = c.transformed(e);

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) gram(i, j) += co(i, k, l) * co(j, k, l);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd lam = es.eigenvalues();  // ascending
  const double lmax = lam(n - 1);
  if (!(lmax > 1e-24)) throw Error(ErrorCode::DegenerateCubic, "cubic form vanishes");
  int nnull = 0;
  for (int i = 0; i < n; ++i)
    if (lam(i) < null_tol * lmax) ++nnull;
  if (nnull != n - 2)
    throw Error(ErrorCode::WrongSymmetryType,
                "null space of dimension " + std::to_string(nnull) + ", expected " + std::to_string(n - 2));

  const Eigen::VectorXd e1 = es.eigenvectors().col(n - 1);
  const Eigen::VectorXd e2 = es.eigenvectors().col(n - 2);
  auto cub = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) s += co(i, j, k) * x(i) * y(j) * z(k);
    return s;
  };
  // p(θ) = C(X,X,X) with X = cos θ e₁ + sin θ e₂; its third harmonic carries r.
  const double a = cub(e1, e1, e1), b = cub(e1, e1, e2), cc = cub(e1, e2, e2), d = cub(e2, e2, e2);
  const double a3 = 0.25 * (a - 3.0 * cc);
  const double b3 = 0.25 * (3.0 * b - d);
  const double third = 2.0 * std::numbers::pi / 3.0;
  double theta = std::atan2(b3, a3) / 3.0;
  while (theta < 0.0) theta += third;
  while (theta >= third) theta -= third;

  Eigen::MatrixXd q(n, n);
  q.col(0) = std::cos(theta) * e1 + std::sin(theta) * e2;
  q.col(1) = -std::sin(theta) * e1 + std::cos(theta) * e2;
  for (int i = 2; i < n; ++i) q.col(i) = es.eigenvectors().col(n - 1 - i);

  CanonicalFrame out;
  out.frame = e * q;
  out.canonical = co.transformed(q);
  out.r = out.canonical(0, 0, 0);
  out.angle = theta;
  out.shape_residual = pattern_deviation(out.canonical, out.r);
  if (out.shape_residual > shape_tol * std::max(1.0, out.r))
    throw Error(ErrorCode::WrongSymmetryType, "cubic form is not of the canonical shape");
  return out;
}

struct SymmetryGenerators {
  std::vector<double> so2_angle_samples;
  Eigen::Matrix4d s3_rotation;
  Eigen::Matrix4d s3_reflection;

  static SymmetryGenerators standard() {
    SymmetryGenerators s;
    s.so2_angle_samples = {0.3, 1.0, std::numbers::pi / 2.0, 2.5};
    s.s3_rotation = plane_rotation(0, 1, 2.0 * std::numbers::pi / 3.0);
    s.s3_reflection = Eigen::Matrix4d::Identity();
    s.s3_reflection(1, 1) = -1.0;
    s.s3_reflection(2, 2) = -1.0;
    return s;
  }

  /// Rotation by angle in the oriented plane span{X_i, X_j}.
  static Eigen::Matrix4d plane_rotation(int i, int j, double angle) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(i, i) = std::cos(angle);
    m(j, j) = std::cos(angle);
    m(j, i) = std::sin(angle);
    m(i, j) = -std::sin(angle);
    return m;
  }

  std::vector<Eigen::Matrix4d> all() const {
    std::vector<Eigen::Matrix4d> out{s3_rotation, s3_reflection};
    for (double a : so2_angle_samples) out.push_back(plane_rotation(2, 3, a));
    return out;
  }
};

/// max |C(γX_i,γX_j,γX_k) − C(X_i,X_j,X_k)| over generators, with X the
/// g-orthonormalized coordinate frame. For n < 4 each generator acts through
/// its leading n×n block, and generators that do not preserve that block
/// (the N₂ rotations when n = 3) are skipped.
inline double symmetry_residual(const MetricMatrix& g, const CubicTensor& c, const SymmetryGenerators& gens) {
  const int n = c.dim();
  const CubicTensor co = c.transformed(orthonormalizer(g));
  double m = 0.0;
  for (const Eigen::Matrix4d& gamma : gens.all()) {
    if (n < 4) {
      const Eigen::MatrixXd block = gamma.topLeftCorner(n, n);
      if (((block.transpose() * block) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12) continue;
    }
    const CubicTensor t = co.transformed(gamma.topLeftCorner(n, n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) m = std::max(m, std::abs(t(i, j, k) - co(i, j, k)));
  }
  return m;
}

/// max_i |Σ_j C(X_i,X_j,X_j)| in a g-orthonormal frame.
inline double minimality_residual(const MetricMatrix& g, const CubicTensor& c) {
  const CubicTensor co = c.transformed(orthonormalizer(g));
  double m = 0.0;
  for (int i = 0; i < c.dim(); ++i) {
    double tr = 0.0;
    for (int j = 0; j < c.dim(); ++j) tr += co(i, j, j);
    m = std::max(m, std::abs(tr));
  }
  return m;
}

}  // namespace slag
