#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnlab/metrics.hpp"

namespace qnlab {

struct NotUnitVectorError : LinalgError {
  using LinalgError::LinalgError;
};
struct SingularMatrixError : LinalgError {
  using LinalgError::LinalgError;
};
struct InvalidTripleError : LinalgError {
  using LinalgError::LinalgError;
};

// For symmetric A and unit u, projecting both sides by I - u u^T drops the
// squared Frobenius mass by at least ||A u||^2.
struct ProjectionGapReport {
  double gap = 0.0;    // ||A||_F^2 - ||(I-uu^T) A (I-uu^T)||_F^2
  double lower = 0.0;  // ||A u||^2
  bool pass = false;
};
ProjectionGapReport check_projection_gap(const Matrix& a, const Vector& u);

// ||A B||_F <= ||A|| ||B||_F and ||B^T A B||_F <= ||A|| ||B||_F^2 for
// positive definite A.
struct NormProductReport {
  InequalityCheck product;
  InequalityCheck congruence;
  bool pass = false;
};
NormProductReport check_norm_product_bounds(const Matrix& a, const Matrix& b);

// Neumann-series bound on a perturbed inverse: when ||A^{-1}|| ||E|| < 1,
// ||(A+E)^{-1}|| <= ||A^{-1}|| / (1 - ||A^{-1}|| ||E||). Operator 2-norms.
struct InverseDriftReport {
  bool applicable = false;  // hypothesis ||A^{-1}|| ||E|| < 1
  double inv_norm = 0.0;    // ||A^{-1}||
  double drift = 0.0;       // ||A^{-1}|| ||E||
  double actual = 0.0;      // ||(A+E)^{-1}||
  double bound = 0.0;
  bool pass = false;
};
InverseDriftReport check_banach(const Matrix& a, const Matrix& e);

// One-step near-monotonicity of the potential: the new distance from the
// identity shrinks by a directional term up to a correction proportional to
// tau. Preconditions that fail mark the report inapplicable; the bound is
// only claimed under them.
struct PotentialAuditReport {
  bool applicable = false;
  std::string reason;  // set when not applicable
  int k = -1;
  double tau = 0.0;
  double correction = 0.0;  // W_k tau_k (direct side) or V_k tau_k (inverse side)
  double decrease = 0.0;    // directional decrease term
  double lhs = 0.0;         // potential at k+1
  double rhs = 0.0;         // potential at k - decrease + correction
  double rhs_weak = 0.0;    // variant with the decrease denominator doubled
  bool pass = false;
  bool pass_weak = false;
};
// Direct approximation side, decrease along s_hat; needs B_hat in both
// frames, tau < 1, and potential_B(k) <= delta.
PotentialAuditReport dfp_potential_audit(const WeightedFrame& fk,
                                         const WeightedFrame& fk1, double delta);
// Inverse approximation side, decrease along y_hat; mirror preconditions.
PotentialAuditReport bfgs_potential_audit(const WeightedFrame& fk,
                                          const WeightedFrame& fk1, double delta);

// Scalar budget (r, epsilon, delta): contraction factor, initial-distance
// budget, potential budget. The condition systems and envelopes below need
// r in (0,1), epsilon in [0,1), delta > 0.
struct ConditionTriple {
  double r = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
};

struct ConditionInequality {
  std::string name;
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
};

struct ConditionCertificate {
  Method system = Method::DFP;  // DFP or BFGS
  ConditionTriple triple;
  std::vector<ConditionInequality> inequalities;
  bool pass = false;

  // Radii of the certified basin. The x-side radius is epsilon in units of
  // mu^{3/2} / (M sqrt(L)); the matrix-side radius is delta in weighted
  // Frobenius distance from the identity.
  double x_radius_coefficient = 0.0;
  double matrix_radius = 0.0;

  // Concrete radii for a given objective; infinite when M = 0.
  double x_radius(double mu, double lip_grad, double lip_hess) const;
  // Initialization with the exact Hessian at x0 only needs x0 this close.
  double practical_x_radius(double mu, double lip_grad, double lip_hess,
                            int dim) const;
};

ConditionCertificate dfp_conditions(const ConditionTriple& triple);
ConditionCertificate bfgs_conditions(const ConditionTriple& triple);

// Per-iteration upper bounds on ||r_k|| / ||r_0||. SqrtK is the clean
// (1/sqrt(k))^k envelope; the guarantee forms are what the DFP/BFGS
// analyses actually certify for a passing triple.
enum class EnvelopeForm { SqrtK, DfpGuarantee, BfgsGuarantee };

struct RateEnvelope {
  EnvelopeForm form = EnvelopeForm::SqrtK;
  std::optional<ConditionTriple> triple;  // required for the guarantee forms
  double kappa = 1.0;  // sqrt(L/mu); reported separately, never folded in

  double base(int k) const;   // k-th root of the envelope
  double value(int k) const;  // base(k)^k
};

RateEnvelope make_envelope(EnvelopeForm form,
                           std::optional<ConditionTriple> triple = std::nullopt,
                           double kappa = 1.0);
double rate_envelope(EnvelopeForm form, const std::optional<ConditionTriple>& triple,
                     int k);

// Checks a finished run against everything a passing triple promises:
// initial smallness, per-step contraction, bounded potentials and norms,
// the summed-distance budget, and the superlinear ratio envelope. Purely
// observational; a failed hypothesis downgrades nothing to an error.
struct MonitorCheck {
  std::string name;
  bool applicable = false;
  double lhs = 0.0, rhs = 0.0;
  bool pass = true;
};

struct MonitorRow {
  int k = -1;
  bool suspended = false;  // ratio below the float-noise floor
  std::vector<MonitorCheck> checks;
  bool pass = true;  // applicable checks only; vacuously true when suspended
};

struct MonitorReport {
  Method system = Method::DFP;
  ConditionTriple triple;

  MonitorCheck initial_distance;   // sigma_0 <= epsilon
  MonitorCheck initial_potential;  // potential_0 <= delta
  bool hypotheses_pass = false;

  std::vector<MonitorRow> rows;
  MonitorCheck summed_distance;  // sum of sigma_k <= epsilon / (1 - r)
  int suspended_rows = 0;
  bool conclusions_pass = false;
  bool pass = false;  // hypotheses and conclusions both
};

MonitorReport trajectory_monitor(const Trace& trace,
                                 const std::vector<WeightedFrame>& frames,
                                 Method system, const ConditionTriple& triple);

}  // namespace qnlab
