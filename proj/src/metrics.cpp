#include "qnlab/metrics.hpp"

#include <cmath>

namespace qnlab {

namespace {

void require_dim(Eigen::Index got, Eigen::Index want, const char* who) {
  if (got != want) {
    throw DimensionError(std::string(who) + ": dimension mismatch");
  }
}

// q(i) * a(i, j) * q(j), multiplying the weights first so that the (i, j)
// and (j, i) entries run the identical arithmetic: the result stays
// bit-exactly symmetric whenever a is.
Matrix diagonal_congruence(const Vector& q, const Matrix& a) {
  const Eigen::Index d = q.size();
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, j) = a(i, j) * (q(i) * q(j));
    }
  }
  return out;
}

double diagonal_identity_distance(const Vector& q, const Matrix& a) {
  const Eigen::Index d = q.size();
  double ssq = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double entry = a(i, j) * (q(i) * q(j)) - (i == j ? 1.0 : 0.0);
      ssq += entry * entry;
    }
  }
  return std::sqrt(ssq);
}

}  // namespace

Vector MetricContext::apply_half(const Vector& v) const {
  require_dim(v.size(), dim(), "apply_half");
  return diagonal ? Vector(half_diag.cwiseProduct(v)) : Vector(half * v);
}

Vector MetricContext::apply_neg_half(const Vector& v) const {
  require_dim(v.size(), dim(), "apply_neg_half");
  return diagonal ? Vector(neg_half_diag.cwiseProduct(v)) : Vector(neg_half * v);
}

Matrix MetricContext::congruence_half(const Matrix& a) const {
  require_dim(a.rows(), dim(), "congruence_half");
  return diagonal ? diagonal_congruence(half_diag, a) : symmetrized(half * a * half);
}

Matrix MetricContext::congruence_neg_half(const Matrix& a) const {
  require_dim(a.rows(), dim(), "congruence_neg_half");
  return diagonal ? diagonal_congruence(neg_half_diag, a)
                  : symmetrized(neg_half * a * neg_half);
}

double MetricContext::identity_distance_half(const Matrix& a) const {
  require_dim(a.rows(), dim(), "identity_distance_half");
  if (diagonal) return diagonal_identity_distance(half_diag, a);
  return (congruence_half(a) - Matrix::Identity(dim(), dim())).norm();
}

double MetricContext::identity_distance_neg_half(const Matrix& a) const {
  require_dim(a.rows(), dim(), "identity_distance_neg_half");
  if (diagonal) return diagonal_identity_distance(neg_half_diag, a);
  return (congruence_neg_half(a) - Matrix::Identity(dim(), dim())).norm();
}

double MetricContext::sigma_of(double r_norm) const {
  return hess_lip / std::pow(mu, 1.5) * r_norm;
}

MetricContext build_context(const Objective& obj, int audit_cap) {
  MetricContext ctx;
  ctx.xstar = obj.optimum();
  ctx.mu = obj.mu();
  ctx.hess_lip = obj.lip_hess();
  ctx.audit_cap = audit_cap;
  if (!(ctx.mu > 0.0)) {
    throw NotPositiveDefiniteError("build_context: objective is not strongly convex");
  }
  if (obj.hessian_is_diagonal()) {
    ctx.diagonal = true;
    ctx.hstar_diag = obj.hessian_diagonal(ctx.xstar);
    if (ctx.hstar_diag.size() == 0 || ctx.hstar_diag.minCoeff() <= 0.0) {
      throw NotPositiveDefiniteError(
          "build_context: Hessian at the optimum is not positive definite");
    }
    ctx.half_diag = diagonal_power_half(ctx.hstar_diag, +1);
    ctx.neg_half_diag = diagonal_power_half(ctx.hstar_diag, -1);
  } else {
    ctx.hstar = symmetrized(obj.hessian(ctx.xstar));
    ctx.half = matrix_power_half(ctx.hstar, +1);
    ctx.neg_half = matrix_power_half(ctx.hstar, -1);
  }
  return ctx;
}

WeightedFrame frame(const MetricContext& ctx, const IterateRecord& rec,
                    const IterateRecord* next) {
  const Eigen::Index d = ctx.dim();
  require_dim(rec.x.size(), d, "frame");

  WeightedFrame f;
  f.k = rec.k;
  f.r = ctx.apply_half(rec.x - ctx.xstar);
  f.r_norm = f.r.norm();
  f.sigma = ctx.sigma_of(f.r_norm);
  f.grad_hat = ctx.apply_neg_half(rec.grad);

  // A breakdown can leave s recorded but y missing; only a complete pair
  // counts as a step here.
  f.has_step = rec.has_step && rec.s.size() == d && rec.y.size() == d;
  if (f.has_step) {
    f.s_hat = ctx.apply_half(rec.s);
    f.y_hat = ctx.apply_neg_half(rec.y);
  }

  if (next != nullptr) {
    require_dim(next->x.size(), d, "frame");
    const double r_next = ctx.apply_half(next->x - ctx.xstar).norm();
    f.tau = std::max(f.sigma, ctx.sigma_of(r_next));
  }

  const bool materialize = d <= ctx.audit_cap;
  if (rec.B) {
    if (materialize) {
      f.B_hat = ctx.congruence_neg_half(*rec.B);
      f.potential_B = (*f.B_hat - Matrix::Identity(d, d)).norm();
    } else {
      f.potential_B = ctx.identity_distance_neg_half(*rec.B);
    }
  }
  if (rec.H) {
    if (materialize) {
      f.H_hat = ctx.congruence_half(*rec.H);
      f.potential_H = (*f.H_hat - Matrix::Identity(d, d)).norm();
    } else {
      f.potential_H = ctx.identity_distance_half(*rec.H);
    }
  }
  return f;
}

std::vector<WeightedFrame> replay_frames(const Objective& obj, const Trace& trace,
                                         const MetricContext& ctx,
                                         const ReplayOptions& opts) {
  const auto& recs = trace.records;
  std::vector<WeightedFrame> frames;
  frames.reserve(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const IterateRecord* next = i + 1 < recs.size() ? &recs[i + 1] : nullptr;
    frames.push_back(frame(ctx, recs[i], next));
  }

  // Records above the storage cap carry no matrices. Rebuild the Hessian
  // approximations by rerunning the updates on the recorded steps, which
  // reproduces the run's matrices exactly, and attach the potentials (and,
  // below the audit cap, the hatted matrices themselves).
  const bool quasi_newton =
      trace.config.method == Method::DFP || trace.config.method == Method::BFGS;
  if (!opts.with_potentials || !quasi_newton || recs.empty()) return frames;
  const bool need_H = !frames.front().potential_H.has_value();
  const bool need_B =
      trace.config.method == Method::DFP && !frames.front().potential_B.has_value();
  if (!need_H && !need_B) return frames;  // the trace stored everything

  OptimizerConfig init_cfg = trace.config;
  init_cfg.track_B = need_B;
  OptState state;
  try {
    state = make_initial_state(obj, init_cfg);
  } catch (const LinalgError&) {
    return frames;  // breakdown at init: vector-level frames are all there is
  }

  const Eigen::Index d = ctx.dim();
  const bool materialize = d <= ctx.audit_cap;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    WeightedFrame& f = frames[i];
    if (need_H) {
      if (materialize) {
        f.H_hat = ctx.congruence_half(state.H);
        f.potential_H = (*f.H_hat - Matrix::Identity(d, d)).norm();
      } else {
        f.potential_H = ctx.identity_distance_half(state.H);
      }
    }
    if (need_B) {
      if (materialize) {
        f.B_hat = ctx.congruence_neg_half(state.B);
        f.potential_B = (*f.B_hat - Matrix::Identity(d, d)).norm();
      } else {
        f.potential_B = ctx.identity_distance_neg_half(state.B);
      }
    }
    if (recs[i].step_accepted && i + 1 < recs.size()) {
      if (trace.config.method == Method::DFP) {
        state.H = dfp_update_H(state.H, recs[i].s, recs[i].y);
        if (need_B) state.B = dfp_update_B(state.B, recs[i].s, recs[i].y);
      } else {
        state.H = bfgs_update_H(state.H, recs[i].s, recs[i].y);
      }
    }
  }
  return frames;
}

namespace {

InequalityCheck make_check(double lhs, double rhs) {
  InequalityCheck c;
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  c.pass = c.slack >= -tol::kSecantFrameSlack * std::abs(rhs);
  return c;
}

}  // namespace

SecantFrameReport secant_frame_report(const WeightedFrame& f) {
  SecantFrameReport rep;
  rep.sigma = f.sigma;
  if (!f.has_step) {
    rep.reason = "no step recorded (run terminated here)";
    return rep;
  }
  if (!f.tau) {
    rep.reason = "successor iterate missing, tau undefined";
    return rep;
  }
  rep.tau = *f.tau;
  if (!(rep.tau < 1.0)) {
    rep.reason = "tau >= 1, outside the stated regime";
    return rep;
  }
  rep.applicable = true;

  const double sn = f.s_hat.norm();
  const double yn = f.y_hat.norm();
  const double inner = f.s_hat.dot(f.y_hat);
  rep.difference = make_check((f.y_hat - f.s_hat).norm(), rep.tau * sn);
  rep.inner_low = make_check((1.0 - rep.tau) * sn * sn, inner);
  rep.inner_high = make_check(inner, (1.0 + rep.tau) * sn * sn);
  rep.length_low = make_check((1.0 - rep.tau) * sn, yn);
  rep.length_high = make_check(yn, (1.0 + rep.tau) * sn);
  rep.gradient = make_check((f.grad_hat - f.r).norm(), f.sigma * f.r_norm);
  rep.pass = rep.difference.pass && rep.inner_low.pass && rep.inner_high.pass &&
             rep.length_low.pass && rep.length_high.pass && rep.gradient.pass;
  return rep;
}

}  // namespace qnlab
