#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "qnlab/tolerances.hpp"

namespace qnlab {

using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LinalgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFiniteError : LinalgError {
  using LinalgError::LinalgError;
};
struct NotSymmetricError : LinalgError {
  using LinalgError::LinalgError;
};
struct NotPositiveDefiniteError : LinalgError {
  using LinalgError::LinalgError;
};
struct DimensionError : LinalgError {
  using LinalgError::LinalgError;
};

// Eigenvalues in descending order, eigenvectors as matching orthonormal
// columns, so A = V diag(lambda) V^T.
struct SpectralFactorization {
  Vector eigenvalues;
  Matrix eigenvectors;

  Matrix reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
  }
};

// Symmetric eigendecomposition. Input must be square, finite, and symmetric
// to within tol::kSymmetryRel * max(1, ||A||_F).
SpectralFactorization spectral_factor(const Matrix& a);

// A^{+1/2} (sign = +1) or A^{-1/2} (sign = -1) by taking roots of the
// spectrum, returned exactly symmetric. A must be positive definite: every
// eigenvalue above tol::kPositiveDefiniteRel * lambda_max.
Matrix matrix_power_half(const Matrix& a, int sign);

// Same, for a diagonal matrix given by its diagonal. O(d).
Vector diagonal_power_half(const Vector& diag, int sign);

// x = A^{-1} b for symmetric positive definite A (Cholesky).
Vector solve_spd(const Matrix& a, const Vector& b);
Matrix solve_spd(const Matrix& a, const Matrix& b);

// (A + A^T) / 2, exactly symmetric by construction.
Matrix symmetrized(const Matrix& a);

template <typename Derived>
Scalar frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

// Largest |eigenvalue| of a symmetric matrix (= operator 2-norm).
Scalar spectral_norm(const Matrix& a);
Scalar spectral_norm_diagonal(const Vector& diag);

// ||Q A Q||_F for symmetric positive definite weight Q.
Scalar weighted_frobenius(const Matrix& a, const Matrix& q);

// Diagonal-weight fast path: Q = diag(q). Runs in O(d^2) without forming
// the congruence.
Scalar weighted_frobenius(const Matrix& a, const Vector& q);

namespace detail {
void require_finite(const Matrix& a, const char* who);
void require_square(const Matrix& a, const char* who);
void require_symmetric(const Matrix& a, const char* who);
}  // namespace detail

}  // namespace qnlab
