#include "qnlab/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace qnlab {

namespace detail {

void require_finite(const Matrix& a, const char* who) {
  if (!a.allFinite()) {
    throw NonFiniteError(std::string(who) + ": input has NaN or Inf entries");
  }
}

void require_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError(std::string(who) + ": matrix must be square and nonempty");
  }
}

void require_symmetric(const Matrix& a, const char* who) {
  const double scale = std::max(1.0, a.norm());
  if ((a - a.transpose()).norm() > tol::kSymmetryRel * scale) {
    throw NotSymmetricError(std::string(who) + ": matrix is not symmetric");
  }
}

}  // namespace detail

SpectralFactorization spectral_factor(const Matrix& a) {
  detail::require_square(a, "spectral_factor");
  detail::require_finite(a, "spectral_factor");
  detail::require_symmetric(a, "spectral_factor");

  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw LinalgError("spectral_factor: eigeniteration did not converge");
  }

  // SelfAdjointEigenSolver sorts ascending; flip to descending.
  const Eigen::Index d = a.rows();
  SpectralFactorization f;
  f.eigenvalues = es.eigenvalues().reverse();
  f.eigenvectors.resize(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    f.eigenvectors.col(j) = es.eigenvectors().col(d - 1 - j);
  }
  return f;
}

namespace {

// Shared PD gate: every eigenvalue must clear the relative floor.
void require_positive_spectrum(const Vector& lambda, const char* who) {
  const double lmax = lambda(0);  // descending order
  if (!(lmax > 0.0)) {
    throw NotPositiveDefiniteError(std::string(who) + ": matrix is not positive definite");
  }
  if (lambda(lambda.size() - 1) <= tol::kPositiveDefiniteRel * lmax) {
    throw NotPositiveDefiniteError(std::string(who) +
                                   ": eigenvalue below positive definite tolerance");
  }
}

}  // namespace

Matrix matrix_power_half(const Matrix& a, int sign) {
  if (sign != 1 && sign != -1) {
    throw DimensionError("matrix_power_half: sign must be +1 or -1");
  }
  SpectralFactorization f = spectral_factor(a);
  require_positive_spectrum(f.eigenvalues, "matrix_power_half");

  Vector roots = f.eigenvalues.cwiseSqrt();
  if (sign < 0) roots = roots.cwiseInverse();
  return symmetrized(f.eigenvectors * roots.asDiagonal() * f.eigenvectors.transpose());
}

Vector diagonal_power_half(const Vector& diag, int sign) {
  if (sign != 1 && sign != -1) {
    throw DimensionError("diagonal_power_half: sign must be +1 or -1");
  }
  if (diag.size() == 0) {
    throw DimensionError("diagonal_power_half: empty diagonal");
  }
  if (!diag.allFinite()) {
    throw NonFiniteError("diagonal_power_half: input has NaN or Inf entries");
  }
  const double dmax = diag.maxCoeff();
  if (!(dmax > 0.0) || diag.minCoeff() <= tol::kPositiveDefiniteRel * dmax) {
    throw NotPositiveDefiniteError("diagonal_power_half: diagonal is not positive definite");
  }
  Vector roots = diag.cwiseSqrt();
  if (sign < 0) roots = roots.cwiseInverse();
  return roots;
}

Vector solve_spd(const Matrix& a, const Vector& b) {
  detail::require_square(a, "solve_spd");
  detail::require_finite(a, "solve_spd");
  detail::require_symmetric(a, "solve_spd");
  if (b.size() != a.rows()) {
    throw DimensionError("solve_spd: rhs size does not match");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("solve_spd: Cholesky failed, matrix not positive definite");
  }
  return llt.solve(b);
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  detail::require_square(a, "solve_spd");
  detail::require_finite(a, "solve_spd");
  detail::require_symmetric(a, "solve_spd");
  if (b.rows() != a.rows()) {
    throw DimensionError("solve_spd: rhs rows do not match");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("solve_spd: Cholesky failed, matrix not positive definite");
  }
  return llt.solve(b);
}

Matrix symmetrized(const Matrix& a) {
  detail::require_square(a, "symmetrized");
  const Eigen::Index d = a.rows();
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, j) = 0.5 * (a(i, j) + a(j, i));
    }
  }
  return out;
}

Scalar spectral_norm(const Matrix& a) {
  SpectralFactorization f = spectral_factor(a);
  return f.eigenvalues.cwiseAbs().maxCoeff();
}

Scalar spectral_norm_diagonal(const Vector& diag) {
  if (diag.size() == 0) {
    throw DimensionError("spectral_norm_diagonal: empty diagonal");
  }
  return diag.cwiseAbs().maxCoeff();
}

Scalar weighted_frobenius(const Matrix& a, const Matrix& q) {
  detail::require_square(a, "weighted_frobenius");
  if (q.rows() != a.rows() || q.cols() != a.cols()) {
    throw DimensionError("weighted_frobenius: weight size does not match");
  }
  return (q * a * q).norm();
}

Scalar weighted_frobenius(const Matrix& a, const Vector& q) {
  detail::require_square(a, "weighted_frobenius");
  if (q.size() != a.rows()) {
    throw DimensionError("weighted_frobenius: weight size does not match");
  }
  // (Q A Q)_ij = q_i a_ij q_j; accumulate squares without a temporary.
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double v = q(i) * a(i, j) * q(j);
      sum += v * v;
    }
  }
  return std::sqrt(sum);
}

}  // namespace qnlab
