#include "qnlab/theory.hpp"

#include <cmath>
#include <limits>

namespace qnlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool leq_with_slack(double lhs, double rhs, double slack) {
  return lhs <= rhs + slack * std::max(1.0, std::abs(rhs));
}

InequalityCheck slacked(double lhs, double rhs, double slack) {
  InequalityCheck c;
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  c.pass = leq_with_slack(lhs, rhs, slack);
  return c;
}

}  // namespace

ProjectionGapReport check_projection_gap(const Matrix& a, const Vector& u) {
  detail::require_square(a, "check_projection_gap");
  detail::require_finite(a, "check_projection_gap");
  detail::require_symmetric(a, "check_projection_gap");
  if (u.size() != a.rows()) {
    throw DimensionError("check_projection_gap: vector size does not match");
  }
  if (std::abs(u.norm() - 1.0) > 1e-12) {
    throw NotUnitVectorError("check_projection_gap: u is not a unit vector");
  }
  const Matrix p = Matrix::Identity(a.rows(), a.cols()) - u * u.transpose();
  const double total = a.squaredNorm();
  ProjectionGapReport rep;
  rep.gap = total - (p * a * p).squaredNorm();
  rep.lower = (a * u).squaredNorm();
  rep.pass = rep.gap >= rep.lower - tol::kProjectionGapSlack * std::max(1.0, total);
  return rep;
}

NormProductReport check_norm_product_bounds(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("check_norm_product_bounds: A and B do not conform");
  }
  const SpectralFactorization f = spectral_factor(a);
  if (f.eigenvalues(f.eigenvalues.size() - 1) <= 0.0) {
    throw NotPositiveDefiniteError("check_norm_product_bounds: A is not positive definite");
  }
  const double norm_a = f.eigenvalues(0);
  NormProductReport rep;
  rep.product = slacked((a * b).norm(), norm_a * b.norm(), tol::kNormProductSlack);
  rep.congruence = slacked((b.transpose() * a * b).norm(), norm_a * b.squaredNorm(),
                           tol::kNormProductSlack);
  rep.pass = rep.product.pass && rep.congruence.pass;
  return rep;
}

InverseDriftReport check_banach(const Matrix& a, const Matrix& e) {
  detail::require_square(a, "check_banach");
  detail::require_finite(a, "check_banach");
  detail::require_finite(e, "check_banach");
  if (e.rows() != a.rows() || e.cols() != a.cols()) {
    throw DimensionError("check_banach: perturbation shape does not match");
  }
  const auto singular_values = [](const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
  };
  const Vector sv_a = singular_values(a);
  const double smin_a = sv_a(sv_a.size() - 1);
  if (smin_a <= 1e-15 * sv_a(0)) {
    throw SingularMatrixError("check_banach: A is singular to working precision");
  }
  InverseDriftReport rep;
  rep.inv_norm = 1.0 / smin_a;
  rep.drift = rep.inv_norm * singular_values(e)(0);
  if (!(rep.drift < 1.0)) {
    return rep;  // hypothesis violated: the bound claims nothing here
  }
  rep.applicable = true;
  rep.bound = rep.inv_norm / (1.0 - rep.drift);
  const Vector sv_sum = singular_values(a + e);
  const double smin_sum = sv_sum(sv_sum.size() - 1);
  rep.actual = smin_sum > 0.0 ? 1.0 / smin_sum : kInf;
  rep.pass = rep.actual <= rep.bound * (1.0 + tol::kBanachSlack);
  return rep;
}

namespace {

// Shared shape of both potential audits: the direct side decreases along
// s_hat with correction weight W, the inverse side along y_hat with V.
PotentialAuditReport potential_audit(const char* side, const WeightedFrame& fk,
                                     const WeightedFrame& fk1, double delta,
                                     const std::optional<Matrix>& mat,
                                     const std::optional<double>& pot_k,
                                     const std::optional<double>& pot_k1,
                                     const Vector& dir, bool inverse_side) {
  PotentialAuditReport rep;
  rep.k = fk.k;
  if (!(delta > 0.0)) {
    rep.reason = "delta must be positive";
    return rep;
  }
  if (!fk.has_step) {
    rep.reason = "no step recorded at this iterate";
    return rep;
  }
  if (!fk.tau) {
    rep.reason = "tau undefined (no successor iterate)";
    return rep;
  }
  rep.tau = *fk.tau;
  if (!(rep.tau < 1.0)) {
    rep.reason = "tau >= 1, outside the stated regime";
    return rep;
  }
  if (!mat || !pot_k || !pot_k1) {
    rep.reason = std::string(side) + " matrices not materialized for this trace";
    return rep;
  }
  if (!(*pot_k <= delta * (1.0 + tol::kConditionSlack))) {
    rep.reason = "potential at k exceeds delta";
    return rep;
  }
  const double dir2 = dir.squaredNorm();
  if (!(dir2 > 0.0)) {
    rep.reason = "degenerate zero step";
    return rep;
  }
  rep.applicable = true;

  const double t = rep.tau;
  const double norm = spectral_norm(*mat);
  const double w = inverse_side
                       ? norm * 4.0 / (1.0 - t) +
                             norm * 4.0 * (1.0 + t) * (1.0 + t) * t /
                                 ((1.0 - t) * (1.0 - t)) +
                             (3.0 + 2.0 * t) / (1.0 - t)
                       : norm * 4.0 / (1.0 - t) +
                             norm * 4.0 * t / ((1.0 - t) * (1.0 - t)) +
                             (3.0 + t) / (1.0 - t);
  rep.correction = w * t;
  rep.decrease = (*mat * dir - dir).squaredNorm() / (2.0 * delta * dir2);
  rep.lhs = *pot_k1;
  rep.rhs = *pot_k - rep.decrease + rep.correction;
  rep.rhs_weak = *pot_k - rep.decrease / 2.0 + rep.correction;
  rep.pass = leq_with_slack(rep.lhs, rep.rhs, tol::kPotentialAuditSlack);
  rep.pass_weak = leq_with_slack(rep.lhs, rep.rhs_weak, tol::kPotentialAuditSlack);
  return rep;
}

}  // namespace

PotentialAuditReport dfp_potential_audit(const WeightedFrame& fk,
                                         const WeightedFrame& fk1, double delta) {
  return potential_audit("direct-side", fk, fk1, delta, fk.B_hat, fk.potential_B,
                         fk1.potential_B, fk.has_step ? fk.s_hat : Vector(),
                         /*inverse_side=*/false);
}

PotentialAuditReport bfgs_potential_audit(const WeightedFrame& fk,
                                          const WeightedFrame& fk1, double delta) {
  return potential_audit("inverse-side", fk, fk1, delta, fk.H_hat, fk.potential_H,
                         fk1.potential_H, fk.has_step ? fk.y_hat : Vector(),
                         /*inverse_side=*/true);
}

namespace {

void validate_triple(const ConditionTriple& t, const char* who) {
  const bool finite = std::isfinite(t.r) && std::isfinite(t.epsilon) && std::isfinite(t.delta);
  if (!finite || !(t.r > 0.0 && t.r < 1.0) || !(t.epsilon >= 0.0 && t.epsilon < 1.0) ||
      !(t.delta > 0.0)) {
    throw InvalidTripleError(std::string(who) +
                             ": need r in (0,1), epsilon in [0,1), delta > 0");
  }
}

ConditionInequality condition(const char* name, double lhs, double rhs) {
  ConditionInequality c;
  c.name = name;
  c.lhs = lhs;
  c.rhs = rhs;
  c.pass = leq_with_slack(lhs, rhs, tol::kConditionSlack);
  return c;
}

}  // namespace

double ConditionCertificate::x_radius(double mu, double lip_grad,
                                      double lip_hess) const {
  if (!(lip_hess > 0.0)) return kInf;
  return std::pow(mu, 1.5) * x_radius_coefficient / (lip_hess * std::sqrt(lip_grad));
}

double ConditionCertificate::practical_x_radius(double mu, double lip_grad,
                                                double lip_hess, int dim) const {
  if (!(lip_hess > 0.0)) return kInf;
  const double root_d = std::sqrt(static_cast<double>(dim));
  if (system == Method::DFP) {
    return std::min(x_radius(mu, lip_grad, lip_hess),
                    mu * matrix_radius / (lip_hess * root_d));
  }
  return std::pow(mu, 1.5) / (lip_hess * std::sqrt(lip_grad)) *
         std::min(triple.epsilon, triple.delta / root_d);
}

ConditionCertificate dfp_conditions(const ConditionTriple& triple) {
  validate_triple(triple, "dfp_conditions");
  const double r = triple.r, e = triple.epsilon, d = triple.delta;
  ConditionCertificate cert;
  cert.system = Method::DFP;
  cert.triple = triple;
  const double budget =
      ((2.0 * d + 1.0) * 4.0 / ((1.0 - e) * (1.0 - e)) + (3.0 + e) / (1.0 - e)) * e /
      (1.0 - r);
  cert.inequalities.push_back(condition("potential-budget", budget, d));
  cert.inequalities.push_back(condition("contraction-margin", e + 2.0 * d, r / (1.0 + r)));
  cert.pass = cert.inequalities[0].pass && cert.inequalities[1].pass;
  cert.x_radius_coefficient = e;
  cert.matrix_radius = d;
  return cert;
}

ConditionCertificate bfgs_conditions(const ConditionTriple& triple) {
  validate_triple(triple, "bfgs_conditions");
  const double r = triple.r, e = triple.epsilon, d = triple.delta;
  ConditionCertificate cert;
  cert.system = Method::BFGS;
  cert.triple = triple;
  const double budget = ((2.0 * d + 1.0) * 4.0 * (1.0 + 2.0 * e * e + e * e * e) /
                             ((1.0 - e) * (1.0 - e)) +
                         (3.0 + 2.0 * e) / (1.0 - e)) *
                        e / (1.0 - r);
  cert.inequalities.push_back(condition("potential-budget", budget, d));
  cert.inequalities.push_back(
      condition("contraction-margin", (2.0 * d + 1.0) * e + 2.0 * d, r));
  cert.pass = cert.inequalities[0].pass && cert.inequalities[1].pass;
  cert.x_radius_coefficient = e;
  cert.matrix_radius = d;
  return cert;
}

double RateEnvelope::base(int k) const {
  if (k < 1) {
    throw ConfigError("rate envelope needs k >= 1");
  }
  const double kk = static_cast<double>(k);
  if (form == EnvelopeForm::SqrtK) {
    return 1.0 / std::sqrt(kk);
  }
  const ConditionTriple& t = *triple;
  const double root2 = std::sqrt(2.0);
  if (form == EnvelopeForm::DfpGuarantee) {
    return (2.0 * root2 * t.delta * (1.0 + t.r) / (1.0 - t.epsilon) * std::sqrt(kk) +
            (1.0 + t.r) * t.epsilon / ((1.0 - t.r) * (1.0 - t.epsilon))) /
           kk;
  }
  return (2.0 * root2 * t.delta * (1.0 + t.epsilon) * (1.0 + t.r) /
              ((1.0 - t.epsilon) * (1.0 - t.r)) * std::sqrt(kk) +
          (1.0 + t.epsilon) * t.epsilon * (1.0 + t.r) /
              ((1.0 - t.epsilon) * (1.0 - t.epsilon) * (1.0 - t.r) * (1.0 - t.r))) /
         kk;
}

double RateEnvelope::value(int k) const {
  if (form == EnvelopeForm::SqrtK) {
    if (k < 1) throw ConfigError("rate envelope needs k >= 1");
    return std::pow(static_cast<double>(k), -0.5 * k);
  }
  return std::pow(base(k), k);
}

RateEnvelope make_envelope(EnvelopeForm form, std::optional<ConditionTriple> triple,
                           double kappa) {
  RateEnvelope env;
  env.form = form;
  env.kappa = kappa;
  if (form != EnvelopeForm::SqrtK) {
    if (!triple) {
      throw InvalidTripleError("make_envelope: guarantee forms need a triple");
    }
    validate_triple(*triple, "make_envelope");
    env.triple = triple;
  }
  return env;
}

double rate_envelope(EnvelopeForm form, const std::optional<ConditionTriple>& triple,
                     int k) {
  return make_envelope(form, triple).value(k);
}

namespace {

MonitorCheck monitor_check(const char* name, double lhs, double rhs, double slack,
                           bool applicable = true) {
  MonitorCheck c;
  c.name = name;
  c.applicable = applicable;
  c.lhs = lhs;
  c.rhs = rhs;
  c.pass = !applicable || leq_with_slack(lhs, rhs, slack);
  return c;
}

MonitorCheck inapplicable_check(const char* name) {
  MonitorCheck c;
  c.name = name;
  return c;
}

// ||M|| and ||M^{-1}|| from one symmetric eigendecomposition.
void symmetric_norms(const Matrix& m, double& norm, double& inv_norm) {
  const SpectralFactorization f = spectral_factor(m);
  const Vector abs = f.eigenvalues.cwiseAbs();
  norm = abs.maxCoeff();
  const double least = abs.minCoeff();
  inv_norm = least > 0.0 ? 1.0 / least : kInf;
}

}  // namespace

MonitorReport trajectory_monitor(const Trace& trace,
                                 const std::vector<WeightedFrame>& frames,
                                 Method system, const ConditionTriple& triple) {
  if (system != Method::DFP && system != Method::BFGS) {
    throw ConfigError("trajectory_monitor: system must be dfp or bfgs");
  }
  validate_triple(triple, "trajectory_monitor");
  if (frames.size() != trace.records.size()) {
    throw ConfigError("trajectory_monitor: frames do not match the trace");
  }

  MonitorReport report;
  report.system = system;
  report.triple = triple;
  if (frames.empty()) return report;

  const bool direct_side = system == Method::DFP;
  const double r0 = frames.front().r_norm;
  const RateEnvelope env = make_envelope(
      direct_side ? EnvelopeForm::DfpGuarantee : EnvelopeForm::BfgsGuarantee, triple);

  report.initial_distance = monitor_check("initial-distance", frames.front().sigma,
                                          triple.epsilon, tol::kMonitorSlack);
  const std::optional<double>& pot0 =
      direct_side ? frames.front().potential_B : frames.front().potential_H;
  report.initial_potential =
      pot0 ? monitor_check("initial-potential", *pot0, triple.delta, tol::kMonitorSlack)
           : inapplicable_check("initial-potential");
  report.hypotheses_pass = report.initial_distance.pass &&
                           report.initial_potential.applicable &&
                           report.initial_potential.pass;

  const double norm_cap = 2.0 * triple.delta + 1.0;
  const double inv_cap = direct_side ? 1.0 + triple.r : 1.0 / (1.0 - triple.r);
  double sigma_sum = 0.0;
  bool conclusions = true;

  for (std::size_t i = 0; i < frames.size(); ++i) {
    const WeightedFrame& f = frames[i];
    sigma_sum += f.sigma;
    MonitorRow row;
    row.k = f.k;
    row.suspended = r0 > 0.0 && f.r_norm <= tol::kRatioFloor * r0;
    if (row.suspended) {
      report.suspended_rows += 1;
      report.rows.push_back(std::move(row));
      continue;
    }

    if (i + 1 < frames.size()) {
      row.checks.push_back(monitor_check("contraction", frames[i + 1].sigma,
                                         triple.r * f.sigma, tol::kMonitorSlack));
    }
    const std::optional<double>& pot = direct_side ? f.potential_B : f.potential_H;
    row.checks.push_back(pot ? monitor_check("potential-bound", *pot,
                                             2.0 * triple.delta, tol::kMonitorSlack)
                             : inapplicable_check("potential-bound"));
    const std::optional<Matrix>& mat = direct_side ? f.B_hat : f.H_hat;
    if (mat) {
      double norm = 0.0, inv_norm = 0.0;
      symmetric_norms(*mat, norm, inv_norm);
      row.checks.push_back(monitor_check("approx-norm", norm, norm_cap, tol::kMonitorSlack));
      row.checks.push_back(
          monitor_check("inverse-norm", inv_norm, inv_cap, tol::kMonitorSlack));
    } else {
      row.checks.push_back(inapplicable_check("approx-norm"));
      row.checks.push_back(inapplicable_check("inverse-norm"));
    }
    if (f.k >= 1 && r0 > 0.0) {
      row.checks.push_back(monitor_check("ratio-envelope", f.r_norm / r0,
                                         env.value(f.k), tol::kEnvelopeSlack));
    }

    for (const MonitorCheck& c : row.checks) {
      if (c.applicable && !c.pass) row.pass = false;
    }
    conclusions = conclusions && row.pass;
    report.rows.push_back(std::move(row));
  }

  report.summed_distance = monitor_check("summed-distance", sigma_sum,
                                         triple.epsilon / (1.0 - triple.r),
                                         tol::kMonitorSlack);
  conclusions = conclusions && report.summed_distance.pass;
  report.conclusions_pass = conclusions;
  report.pass = report.hypotheses_pass && report.conclusions_pass;
  return report;
}

}  // namespace qnlab
