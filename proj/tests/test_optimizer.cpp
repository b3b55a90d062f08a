#include <cmath>
#include <random>

#include "doctest.h"
#include "qnlab/optimizer.hpp"
#include "testutil.hpp"

using namespace qnlab;
using testutil::max_abs_diff;
using testutil::random_spd;
using testutil::random_vector;

namespace {

// Curvature-positive pair for update tests.
void random_pair(std::mt19937_64& rng, int d, Vector& s, Vector& y) {
  s = random_vector(rng, d);
  y = random_vector(rng, d);
  if (s.dot(y) <= 0.0) y = -y;
  while (s.dot(y) <= 1e-6 * s.norm() * y.norm()) {
    y = random_vector(rng, d);
    if (s.dot(y) <= 0.0) y = -y;
  }
}

double min_eigenvalue(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff();
}

std::unique_ptr<Objective> small_f1() { return make_builtin(BuiltinKind::F1, 6, 2.0); }

}  // namespace

TEST_CASE("updates match the textbook rank-two formulas") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 25; ++rep) {
    const int d = 2 + int(rng() % 7);
    const Matrix m = random_spd(rng, d);
    Vector s, y;
    random_pair(rng, d, s, y);
    const double rho = s.dot(y);
    const Matrix id = Matrix::Identity(d, d);

    const Matrix bfgs_naive = (id - s * y.transpose() / rho) * m *
                                  (id - y * s.transpose() / rho) +
                              s * s.transpose() / rho;
    CHECK(max_abs_diff(bfgs_update_H(m, s, y), bfgs_naive) <
          1e-12 * bfgs_naive.cwiseAbs().maxCoeff());

    const Matrix dfp_b_naive = (id - y * s.transpose() / rho) * m *
                                   (id - s * y.transpose() / rho) +
                               y * y.transpose() / rho;
    CHECK(max_abs_diff(dfp_update_B(m, s, y), dfp_b_naive) <
          1e-12 * dfp_b_naive.cwiseAbs().maxCoeff());

    const Vector my = m * y;
    const Matrix dfp_h_naive =
        m - my * my.transpose() / y.dot(my) + s * s.transpose() / rho;
    CHECK(max_abs_diff(dfp_update_H(m, s, y), dfp_h_naive) <
          1e-12 * dfp_h_naive.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("updates satisfy their secant equations") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 25; ++rep) {
    const int d = 2 + int(rng() % 7);
    const Matrix m = random_spd(rng, d);
    Vector s, y;
    random_pair(rng, d, s, y);
    // Residuals scale with the output matrix, which can be much larger than
    // the input when s.y is small relative to ||s|| ||y||.
    const Matrix bp = dfp_update_B(m, s, y);
    CHECK((bp * s - y).norm() < 1e-12 * (bp.norm() * s.norm() + y.norm()));
    const Matrix hp = bfgs_update_H(m, s, y);
    CHECK((hp * y - s).norm() < 1e-12 * (hp.norm() * y.norm() + s.norm()));
    const Matrix hd = dfp_update_H(m, s, y);
    CHECK((hd * y - s).norm() < 1e-12 * (hd.norm() * y.norm() + s.norm()));
  }
}

TEST_CASE("the two rank-two updates are the same map with roles swapped") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 25; ++rep) {
    const int d = 2 + int(rng() % 9);
    const Matrix m = random_spd(rng, d);
    Vector s, y;
    random_pair(rng, d, s, y);
    // Bit-identical, not merely close.
    CHECK(max_abs_diff(bfgs_update_H(m, s, y), dfp_update_B(m, y, s)) == 0.0);
  }
}

TEST_CASE("updates return exactly symmetric positive definite matrices") {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 25; ++rep) {
    const int d = 2 + int(rng() % 7);
    const Matrix m = random_spd(rng, d);
    Vector s, y;
    random_pair(rng, d, s, y);
    for (const Matrix& out : {dfp_update_B(m, s, y), dfp_update_H(m, s, y),
                              bfgs_update_H(m, s, y)}) {
      CHECK(max_abs_diff(out, out.transpose()) == 0.0);
      CHECK(min_eigenvalue(out) > 0.0);
    }
  }
}

TEST_CASE("updates refuse nonpositive curvature") {
  std::mt19937_64 rng(25);
  const int d = 4;
  const Matrix m = random_spd(rng, d);
  Vector s = random_vector(rng, d);
  Vector y = -s;
  CHECK_THROWS_AS(dfp_update_B(m, s, y), CurvatureViolation);
  CHECK_THROWS_AS(dfp_update_H(m, s, y), CurvatureViolation);
  CHECK_THROWS_AS(bfgs_update_H(m, s, y), CurvatureViolation);
  CHECK_THROWS_AS(bfgs_update_H(m, s, Vector(Vector::Zero(d))), CurvatureViolation);
  CHECK_THROWS_AS(bfgs_update_H(m, s, Vector(Vector::Zero(d + 1))), DimensionError);
}

TEST_CASE("make_initial_state honors each policy") {
  const auto obj = small_f1();
  OptimizerConfig config;
  config.method = Method::DFP;
  config.track_B = true;
  config.x0 = Vector::Constant(6, 0.4);

  config.init_policy = InitPolicy::ExactHessianAtX0;
  OptState exact = make_initial_state(*obj, config);
  const Vector hd = obj->hessian_diagonal(config.x0);
  CHECK(max_abs_diff(exact.H, Matrix(hd.cwiseInverse().asDiagonal())) == 0.0);
  CHECK(max_abs_diff(exact.B, Matrix(hd.asDiagonal())) == 0.0);
  CHECK((exact.grad - obj->gradient(config.x0)).norm() == 0.0);

  config.init_policy = InitPolicy::Identity;
  OptState ident = make_initial_state(*obj, config);
  CHECK(max_abs_diff(ident.H, Matrix::Identity(6, 6)) == 0.0);

  config.init_policy = InitPolicy::ScaledIdentity;
  config.scaled_identity_c = 2.5;
  OptState scaled = make_initial_state(*obj, config);
  CHECK(max_abs_diff(scaled.H, 2.5 * Matrix::Identity(6, 6)) == 0.0);
  CHECK(max_abs_diff(scaled.B, (1.0 / 2.5) * Matrix::Identity(6, 6)) == 0.0);
  config.scaled_identity_c = 0.0;
  CHECK_THROWS_AS(make_initial_state(*obj, config), ConfigError);

  config.init_policy = InitPolicy::Explicit;
  CHECK_THROWS_AS(make_initial_state(*obj, config), ConfigError);
  std::mt19937_64 rng(26);
  const Matrix h0 = random_spd(rng, 6);
  config.explicit_init = h0;
  OptState expl = make_initial_state(*obj, config);
  CHECK(max_abs_diff(expl.H, (h0 + h0.transpose()) / 2.0) == 0.0);
  CHECK((expl.B * h0 - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
  Matrix indef = Matrix::Identity(6, 6);
  indef(0, 0) = -1.0;
  config.explicit_init = indef;
  CHECK_THROWS_AS(make_initial_state(*obj, config), NotPositiveDefiniteError);
}

TEST_CASE("a trace is a chain: each record's step lands on the next record") {
  const auto obj = small_f1();
  OptimizerConfig config;
  config.method = Method::BFGS;
  config.x0 = Vector::Constant(6, 0.45);
  const Trace trace = run(*obj, config);

  REQUIRE(trace.records.size() >= 3);
  CHECK(trace.termination == Termination::StepZero);
  for (size_t i = 0; i < trace.records.size(); ++i) {
    const IterateRecord& rec = trace.records[i];
    CHECK(rec.k == int(i));
    const bool last = i + 1 == trace.records.size();
    CHECK(rec.step_accepted == !last);
    if (last) break;
    const IterateRecord& next = trace.records[i + 1];
    CHECK((rec.x + rec.s - next.x).norm() == 0.0);
    CHECK((next.grad - rec.grad - rec.y).norm() == 0.0);
    CHECK((rec.grad - obj->gradient(rec.x)).norm() == 0.0);
  }
}

TEST_CASE("recorded H matrices are the update chain applied to H0") {
  const auto obj = small_f1();
  OptimizerConfig config;
  config.method = Method::BFGS;
  config.x0 = Vector::Constant(6, 0.45);
  const Trace trace = run(*obj, config);

  REQUIRE(trace.records.front().H.has_value());
  Matrix h = make_initial_state(*obj, config).H;
  for (size_t i = 0; i + 1 < trace.records.size(); ++i) {
    CHECK(max_abs_diff(*trace.records[i].H, h) == 0.0);
    h = bfgs_update_H(h, trace.records[i].s, trace.records[i].y);
  }
  CHECK(max_abs_diff(*trace.records.back().H, h) == 0.0);

  // Above the record cap the snapshots are dropped.
  config.matrix_record_cap = 3;
  const Trace capped = run(*obj, config);
  CHECK_FALSE(capped.records.front().H.has_value());
}

TEST_CASE("newton and gradient descent do the classical thing on a quadratic") {
  std::mt19937_64 rng(27);
  const int d = 5;
  const Matrix a = random_spd(rng, d);
  const Vector b = random_vector(rng, d);
  const auto obj = make_quadratic(a, b, 10.0);
  const Vector xstar = obj->optimum();

  OptimizerConfig config;
  config.method = Method::Newton;
  config.x0 = random_vector(rng, d);
  Trace newton = run(*obj, config);
  REQUIRE(newton.records.size() >= 2);
  CHECK((newton.records[1].x - xstar).norm() < 1e-9 * (1.0 + xstar.norm()));

  config.method = Method::GradientDescent;
  config.gd_step = 1.0 / obj->lip_grad();
  config.max_iters = 1;
  Trace gd = run(*obj, config);
  REQUIRE(gd.records.size() == 2);
  const Vector expect =
      config.x0 - config.gd_step * (a * config.x0 - b);
  CHECK((gd.records[1].x - expect).norm() == 0.0);
  CHECK(gd.termination == Termination::MaxIters);
}

TEST_CASE("termination modes and config validation") {
  const auto obj = small_f1();
  OptimizerConfig config;
  config.method = Method::BFGS;
  config.x0 = Vector::Constant(6, 0.45);

  config.max_iters = 0;
  Trace capped = run(*obj, config);
  CHECK(capped.records.size() == 1);
  CHECK(capped.termination == Termination::MaxIters);

  config.max_iters = 60;
  config.stop_grad_tol = 1e30;
  Trace lazy = run(*obj, config);
  CHECK(lazy.records.size() == 1);
  CHECK(lazy.termination == Termination::GradTol);
  CHECK_FALSE(lazy.records.back().has_step);

  config.stop_grad_tol = 0.0;
  config.x0 = Vector::Zero(6);
  Trace at_opt = run(*obj, config);
  CHECK(at_opt.records.size() == 1);
  CHECK(at_opt.termination == Termination::StepZero);

  config.x0 = Vector::Zero(5);
  CHECK_THROWS_AS(run(*obj, config), ConfigError);
  config.x0 = Vector::Constant(6, 0.45);
  config.max_iters = -1;
  CHECK_THROWS_AS(run(*obj, config), ConfigError);
  config.max_iters = 60;
  config.method = Method::GradientDescent;
  config.gd_step = 0.0;
  CHECK_THROWS_AS(run(*obj, config), ConfigError);
}

TEST_CASE("a start outside the certified ball is reported, not rejected") {
  const auto obj = make_builtin(BuiltinKind::F1, 4, 0.5);
  OptimizerConfig config;
  config.method = Method::Newton;
  config.x0 = Vector::Constant(4, 1.0);
  const Trace trace = run(*obj, config);
  REQUIRE(!trace.warnings.empty());
  CHECK(trace.warnings.front().find("outside") != std::string::npos);
}

TEST_CASE("an overflowing start is a recorded breakdown, not a crash") {
  const auto obj = make_builtin(BuiltinKind::F3, 3, 20.0);
  OptimizerConfig config;
  config.method = Method::BFGS;
  config.x0 = Vector::Constant(3, 10.0);  // 400 * 10^399 overflows
  const Trace trace = run(*obj, config);
  CHECK(trace.termination == Termination::NumericalBreakdown);
  CHECK(trace.records.size() == 1);
  CHECK(!trace.breakdown_reason.empty());
}

TEST_CASE("method and termination names are stable") {
  CHECK(std::string(method_name(Method::DFP)) == "dfp");
  CHECK(std::string(method_name(Method::BFGS)) == "bfgs");
  CHECK(std::string(method_name(Method::Newton)) == "newton");
  CHECK(std::string(method_name(Method::GradientDescent)) == "gd");
  CHECK(std::string(termination_name(Termination::StepZero)) == "step_zero");
  CHECK(std::string(termination_name(Termination::NumericalBreakdown)) ==
        "numerical_breakdown");
}
