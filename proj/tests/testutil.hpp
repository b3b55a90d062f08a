#pragma once

// Seeded random matrix/vector factories and small independent oracles used
// across the test binaries. Everything here is deliberately naive; the point
// is to check the library against arithmetic a reader can verify by hand.

#include <cmath>
#include <random>

#include "qnlab/linalg.hpp"

namespace testutil {

inline qnlab::Vector random_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> normal;
  qnlab::Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = normal(rng);
  return v;
}

inline qnlab::Vector random_unit(std::mt19937_64& rng, int d) {
  qnlab::Vector v = random_vector(rng, d);
  while (v.norm() < 1e-8) v = random_vector(rng, d);
  return v / v.norm();
}

inline qnlab::Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal;
  qnlab::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

inline qnlab::Matrix random_symmetric(std::mt19937_64& rng, int d) {
  const qnlab::Matrix g = random_matrix(rng, d, d);
  return ((g + g.transpose()) / 2.0).eval();
}

// G G^T plus a diagonal shift keeps the spectrum safely positive.
inline qnlab::Matrix random_spd(std::mt19937_64& rng, int d, double shift = 0.5) {
  const qnlab::Matrix g = random_matrix(rng, d, d);
  // Above Eigen's blocked-product threshold g g^T is only symmetric to
  // rounding, so force bitwise symmetry; the library's updates preserve it.
  return qnlab::symmetrized(
      (g * g.transpose() + shift * qnlab::Matrix::Identity(d, d)).eval());
}

// Largest singular value via power iteration on A^T A. Slow and simple.
inline double spectral_norm_oracle(const qnlab::Matrix& a, int iters = 500) {
  const qnlab::Matrix ata = a.transpose() * a;
  std::mt19937_64 rng(12345);
  qnlab::Vector v = random_unit(rng, static_cast<int>(ata.rows()));
  for (int i = 0; i < iters; ++i) {
    const qnlab::Vector w = ata * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    v = w / n;
  }
  return std::sqrt(v.dot(ata * v));
}

// Central finite-difference Hessian of a scalar function.
template <typename F>
qnlab::Matrix fd_hessian(F&& f, const qnlab::Vector& x, double h = 1e-5) {
  const int d = static_cast<int>(x.size());
  qnlab::Matrix out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      qnlab::Vector xpp = x, xpm = x, xmp = x, xmm = x;
      xpp(i) += h; xpp(j) += h;
      xpm(i) += h; xpm(j) -= h;
      xmp(i) -= h; xmp(j) += h;
      xmm(i) -= h; xmm(j) -= h;
      out(i, j) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
    }
  }
  return ((out + out.transpose()) / 2.0).eval();
}

// Central finite-difference gradient.
template <typename F>
qnlab::Vector fd_gradient(F&& f, const qnlab::Vector& x, double h = 1e-6) {
  const int d = static_cast<int>(x.size());
  qnlab::Vector out(d);
  for (int i = 0; i < d; ++i) {
    qnlab::Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    out(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return out;
}

inline double max_abs_diff(const qnlab::Matrix& a, const qnlab::Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
