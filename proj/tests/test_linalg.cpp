#include <cmath>
#include <random>

#include "doctest.h"
#include "qnlab/linalg.hpp"
#include "testutil.hpp"

using namespace qnlab;
using testutil::max_abs_diff;
using testutil::random_spd;
using testutil::random_symmetric;
using testutil::random_vector;

TEST_CASE("spectral_factor reconstructs and orders the spectrum") {
  std::mt19937_64 rng(1);
  for (int d : {1, 2, 5, 9}) {
    const Matrix a = random_symmetric(rng, d);
    const SpectralFactorization f = spectral_factor(a);
    CHECK(max_abs_diff(f.reconstruct(), a) < 1e-11);
    CHECK(max_abs_diff(f.eigenvectors * f.eigenvectors.transpose(),
                       Matrix::Identity(d, d)) < 1e-12);
    for (int i = 0; i + 1 < d; ++i) {
      CHECK(f.eigenvalues(i) >= f.eigenvalues(i + 1));
    }
  }
}

TEST_CASE("spectral_factor rejects bad input") {
  Matrix a(2, 3);
  a.setZero();
  CHECK_THROWS_AS(spectral_factor(a), DimensionError);

  Matrix b(2, 2);
  b << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(spectral_factor(b), NotSymmetricError);

  Matrix c = Matrix::Identity(2, 2);
  c(0, 1) = c(1, 0) = std::nan("");
  CHECK_THROWS_AS(spectral_factor(c), NonFiniteError);
}

TEST_CASE("matrix_power_half squares back to the input") {
  std::mt19937_64 rng(2);
  for (int d : {1, 3, 7}) {
    const Matrix a = random_spd(rng, d);
    const Matrix half = matrix_power_half(a, +1);
    const Matrix neg_half = matrix_power_half(a, -1);
    CHECK(max_abs_diff(half * half, a) < 1e-10);
    CHECK(max_abs_diff(half * neg_half, Matrix::Identity(d, d)) < 1e-11);
    CHECK(max_abs_diff(neg_half * a * neg_half, Matrix::Identity(d, d)) < 1e-10);
    CHECK(max_abs_diff(half, half.transpose()) == 0.0);
  }
}

TEST_CASE("matrix_power_half wants positive definiteness") {
  Matrix a(2, 2);
  a << 1.0, 0.0, 0.0, -0.25;
  CHECK_THROWS_AS(matrix_power_half(a, +1), NotPositiveDefiniteError);
  a(1, 1) = 0.0;
  CHECK_THROWS_AS(matrix_power_half(a, -1), NotPositiveDefiniteError);
}

TEST_CASE("diagonal_power_half matches the dense path") {
  std::mt19937_64 rng(3);
  const int d = 6;
  Vector diag(d);
  std::uniform_real_distribution<double> unif(0.1, 4.0);
  for (int i = 0; i < d; ++i) diag(i) = unif(rng);
  for (int sign : {+1, -1}) {
    const Vector fast = diagonal_power_half(diag, sign);
    const Matrix dense = matrix_power_half(Matrix(diag.asDiagonal()), sign);
    CHECK(max_abs_diff(Matrix(fast.asDiagonal()), dense) < 1e-13);
  }
  diag(2) = -1.0;
  CHECK_THROWS_AS(diagonal_power_half(diag, +1), NotPositiveDefiniteError);
}

TEST_CASE("solve_spd agrees with a direct inverse") {
  std::mt19937_64 rng(4);
  const int d = 5;
  const Matrix a = random_spd(rng, d);
  const Vector b = random_vector(rng, d);
  const Vector x = solve_spd(a, b);
  CHECK((a * x - b).norm() < 1e-10 * b.norm());

  const Matrix rhs = testutil::random_matrix(rng, d, 3);
  const Matrix xm = solve_spd(a, rhs);
  CHECK(max_abs_diff(a * xm, rhs) < 1e-10);

  Matrix indef = Matrix::Identity(d, d);
  indef(0, 0) = -1.0;
  CHECK_THROWS_AS(solve_spd(indef, b), NotPositiveDefiniteError);
}

TEST_CASE("symmetrized averages with the transpose") {
  std::mt19937_64 rng(5);
  const Matrix a = testutil::random_matrix(rng, 4, 4);
  const Matrix s = symmetrized(a);
  CHECK(max_abs_diff(s, s.transpose()) == 0.0);
  CHECK(max_abs_diff(s, (a + a.transpose()) / 2.0) < 1e-15);
}

TEST_CASE("frobenius_norm is the root of the summed squares") {
  std::mt19937_64 rng(6);
  const Matrix a = testutil::random_matrix(rng, 3, 5);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 5; ++j) sum += a(i, j) * a(i, j);
  }
  CHECK(frobenius_norm(a) == doctest::Approx(std::sqrt(sum)).epsilon(1e-14));
}

TEST_CASE("spectral_norm matches power iteration") {
  std::mt19937_64 rng(7);
  for (int d : {2, 4, 8}) {
    const Matrix a = random_symmetric(rng, d);
    CHECK(spectral_norm(a) ==
          doctest::Approx(testutil::spectral_norm_oracle(a)).epsilon(1e-9));
  }
  Vector diag(3);
  diag << -5.0, 2.0, 0.5;
  CHECK(spectral_norm_diagonal(diag) == 5.0);
  CHECK(spectral_norm(Matrix(diag.asDiagonal())) == doctest::Approx(5.0));
}

TEST_CASE("weighted_frobenius forms Q A Q") {
  std::mt19937_64 rng(8);
  const int d = 5;
  const Matrix a = random_symmetric(rng, d);
  const Matrix q = random_spd(rng, d);
  const double direct = frobenius_norm(Matrix(q * a * q));
  CHECK(weighted_frobenius(a, q) == doctest::Approx(direct).epsilon(1e-12));

  Vector qd(d);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  for (int i = 0; i < d; ++i) qd(i) = unif(rng);
  const Matrix qdm = qd.asDiagonal();
  CHECK(weighted_frobenius(a, qd) ==
        doctest::Approx(weighted_frobenius(a, qdm)).epsilon(1e-12));
}

TEST_CASE("dimension mismatches are refused") {
  const Matrix a = Matrix::Identity(3, 3);
  const Matrix q = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(weighted_frobenius(a, q), DimensionError);
  CHECK_THROWS_AS(solve_spd(a, Vector(Vector::Ones(2))), DimensionError);
}
