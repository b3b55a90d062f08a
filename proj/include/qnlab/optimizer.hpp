#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnlab/objectives.hpp"

namespace qnlab {

enum class Method { DFP, BFGS, Newton, GradientDescent };
enum class InitPolicy { ExactHessianAtX0, Identity, ScaledIdentity, Explicit };
enum class Termination { MaxIters, StepZero, GradTol, NumericalBreakdown };

struct CurvatureViolation : LinalgError {
  using LinalgError::LinalgError;
};
struct DegenerateDenominator : LinalgError {
  using LinalgError::LinalgError;
};
struct ConfigError : LinalgError {
  using LinalgError::LinalgError;
};

const char* method_name(Method m);
const char* termination_name(Termination t);

struct OptimizerConfig {
  Method method = Method::BFGS;
  Vector x0;
  int max_iters = 60;

  InitPolicy init_policy = InitPolicy::ExactHessianAtX0;
  double scaled_identity_c = 1.0;     // ScaledIdentity: H0 = c I
  std::optional<Matrix> explicit_init;  // Explicit: H0 (must be SPD)

  double gd_step = 0.0;  // required for GradientDescent

  double stop_grad_tol = 0.0;            // absolute on ||grad||; 0 disables
  double stop_step_tol = tol::kStopStep;  // coefficient: stop when ||s|| <= tol (1 + ||x||)

  // DFP only: also maintain the direct Hessian approximation so potential
  // audits can replay it.
  bool track_B = false;

  // H/B snapshots are stored per record only up to this dimension; above it
  // instrumentation reconstructs them from the (s, y) sequence.
  int matrix_record_cap = 200;

  // Newton solves through the diagonal Hessian when the objective has one;
  // set to force the dense Cholesky path instead.
  bool dense_newton = false;
};

struct IterateRecord {
  int k = 0;
  Vector x;
  Vector grad;
  Vector s;  // x_{k+1} - x_k, set when has_step
  Vector y;  // grad_{k+1} - grad_k
  bool has_step = false;
  bool step_accepted = false;
  std::optional<Matrix> H;  // inverse Hessian approximation at iterate k
  std::optional<Matrix> B;  // direct approximation (DFP with track_B)
};

struct Trace {
  OptimizerConfig config;
  std::string objective_id;
  double mu = 0.0, lip_grad = 0.0, lip_hess = 0.0, radius = 0.0;
  std::vector<IterateRecord> records;
  Termination termination = Termination::MaxIters;
  std::string breakdown_reason;
  std::vector<std::string> warnings;
};

// Quasi-Newton updates. All require s.y > tol::kCurvatureRel * ||s|| ||y||
// (CurvatureViolation otherwise) and return exactly symmetric matrices.
Matrix dfp_update_B(const Matrix& b, const Vector& s, const Vector& y);
Matrix dfp_update_H(const Matrix& h, const Vector& s, const Vector& y);
Matrix bfgs_update_H(const Matrix& h, const Vector& s, const Vector& y);

// One iteration's mutable state; step() advances it and completes the
// current IterateRecord with (s, y).
struct OptState {
  int k = 0;
  Vector x;
  Vector grad;
  Matrix H;  // empty for Newton / gradient descent
  Matrix B;  // maintained when track_B
};

enum class StepStatus { Stepped, StepZero };

// Builds the k = 0 state for step(): x0, its gradient, and the initial
// (inverse) Hessian approximation per the init policy. Trace replay uses the
// same entry point so reconstructed matrices match the run bit for bit.
OptState make_initial_state(const Objective& obj, const OptimizerConfig& config);

StepStatus step(const Objective& obj, OptState& state, const OptimizerConfig& config,
                IterateRecord& record);

// Full unit-step run with trace recording; deterministic in (obj, config).
Trace run(const Objective& obj, const OptimizerConfig& config);

}  // namespace qnlab
