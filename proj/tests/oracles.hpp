#pragma once

// Reference computations used to cross-check the library. Each one takes a
// different numerical route from the code under test.

#include "semeq/rng.hpp"
#include "semeq/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

using semeq::Index;
using semeq::Matrix;
using semeq::Vector;

inline Matrix gaussian(Index rows, Index cols, semeq::Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

// Orthogonal n x n matrix from the Q factor of a Gaussian matrix.
inline Matrix orthogonal(Index n, semeq::Rng& rng) {
  const Matrix g = gaussian(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

// Matrix with prescribed singular values via random orthogonal factors.
inline Matrix with_singular_values(Index rows, Index cols, const Vector& s, semeq::Rng& rng) {
  const Matrix u = orthogonal(rows, rng);
  const Matrix v = orthogonal(cols, rng);
  Matrix d = Matrix::Zero(rows, cols);
  for (Index i = 0; i < s.size(); ++i) d(i, i) = s(i);
  return u * d * v.transpose();
}

// Orthogonal projector onto the span of the rows of f, from a pivoted QR of f^T.
inline Matrix row_space_projector(const Matrix& f, double tol = 1e-10) {
  Eigen::ColPivHouseholderQR<Matrix> qr(f.transpose());
  qr.setThreshold(tol);
  const Index r = qr.rank();
  const Matrix q = qr.householderQ() * Matrix::Identity(f.cols(), f.cols());
  const Matrix basis = q.leftCols(r);
  return basis * basis.transpose();
}

// S^{-1/2} of a symmetric positive definite matrix through its eigenbasis.
inline Matrix inverse_sqrt_spd(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Vector inv = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Golden-section minimizer of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             int iterations = 200) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations && b - a > 1e-15 * std::abs(b); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Root of an increasing function on [lo, hi]; returns an endpoint when the
// sign does not change.
inline double bisect_increasing(const std::function<double(double)>& g, double lo, double hi,
                                int iterations = 400) {
  if (g(lo) >= 0.0) return lo;
  if (g(hi) <= 0.0) return hi;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) < 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// W0 by plain bisection on w e^w = x.
inline double lambert_w0_bisect(double x) {
  double lo = 0.0;
  double hi = std::max(1.0, std::log1p(x));
  while (hi * std::exp(hi) < x) hi *= 2.0;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) < x) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double log_uniform(semeq::Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

}  // namespace oracle
