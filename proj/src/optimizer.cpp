#include "qnlab/optimizer.hpp"

#include <cmath>

namespace qnlab {

const char* method_name(Method m) {
  switch (m) {
    case Method::DFP: return "dfp";
    case Method::BFGS: return "bfgs";
    case Method::Newton: return "newton";
    case Method::GradientDescent: return "gd";
  }
  return "?";
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::MaxIters: return "max_iters";
    case Termination::StepZero: return "step_zero";
    case Termination::GradTol: return "grad_tol";
    case Termination::NumericalBreakdown: return "numerical_breakdown";
  }
  return "?";
}

namespace {

void require_curvature(const Vector& s, const Vector& y, const char* who) {
  if (s.size() != y.size() || s.size() == 0) {
    throw DimensionError(std::string(who) + ": s and y sizes do not match");
  }
  if (s.dot(y) <= tol::kCurvatureRel * s.norm() * y.norm()) {
    throw CurvatureViolation(std::string(who) + ": s.y is not safely positive");
  }
}

// (I - a b^T / rho) M (I - b a^T / rho) + a a^T / rho with rho = a.b,
// expanded to rank-two form. Written coefficient-wise so entry (i,j) and
// entry (j,i) run the identical arithmetic: symmetry is preserved bit-exactly
// and no d x d temporaries are formed.
Matrix projected_rank_two(const Matrix& m, const Vector& a, const Vector& b) {
  const double rho = a.dot(b);
  const Vector mb = m * b;
  const Vector t = mb / rho;
  const double coef = b.dot(mb) / (rho * rho) + 1.0 / rho;
  const Eigen::Index d = m.rows();
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, j) = m(i, j) - (a(i) * t(j) + t(i) * a(j)) + coef * (a(i) * a(j));
    }
  }
  return out;
}

}  // namespace

Matrix dfp_update_B(const Matrix& b, const Vector& s, const Vector& y) {
  require_curvature(s, y, "dfp_update_B");
  return projected_rank_two(b, y, s);
}

Matrix bfgs_update_H(const Matrix& h, const Vector& s, const Vector& y) {
  require_curvature(s, y, "bfgs_update_H");
  return projected_rank_two(h, s, y);
}

Matrix dfp_update_H(const Matrix& h, const Vector& s, const Vector& y) {
  require_curvature(s, y, "dfp_update_H");
  const Vector hy = h * y;
  const double yhy = y.dot(hy);
  if (yhy <= tol::kDegenerateDenomRel * y.squaredNorm() * h.norm()) {
    throw DegenerateDenominator("dfp_update_H: y.Hy denominator is degenerate");
  }
  const double rho = s.dot(y);
  const Eigen::Index d = h.rows();
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, j) = h(i, j) - hy(i) * hy(j) / yhy + s(i) * s(j) / rho;
    }
  }
  return out;
}

namespace {

bool uses_inverse_approx(Method m) { return m == Method::DFP || m == Method::BFGS; }

// H0 (and B0 for DFP audits) per init policy.
void initialize_state(const Objective& obj, const OptimizerConfig& config, OptState& state) {
  if (!uses_inverse_approx(config.method)) return;
  const int d = obj.dim();
  switch (config.init_policy) {
    case InitPolicy::ExactHessianAtX0: {
      if (obj.hessian_is_diagonal()) {
        const Vector hd = obj.hessian_diagonal(state.x);
        if (hd.minCoeff() <= 0.0) {
          throw NotPositiveDefiniteError("run: Hessian at x0 is not positive definite");
        }
        state.H = hd.cwiseInverse().asDiagonal();
        if (config.track_B) state.B = hd.asDiagonal();
      } else {
        const Matrix hess = obj.hessian(state.x);
        state.H = symmetrized(solve_spd(hess, Matrix(Matrix::Identity(d, d))));
        if (config.track_B) state.B = symmetrized(hess);
      }
      break;
    }
    case InitPolicy::Identity:
      state.H = Matrix::Identity(d, d);
      if (config.track_B) state.B = Matrix::Identity(d, d);
      break;
    case InitPolicy::ScaledIdentity:
      if (!(config.scaled_identity_c > 0.0)) {
        throw ConfigError("run: ScaledIdentity needs a positive coefficient");
      }
      state.H = config.scaled_identity_c * Matrix::Identity(d, d);
      if (config.track_B) state.B = (1.0 / config.scaled_identity_c) * Matrix::Identity(d, d);
      break;
    case InitPolicy::Explicit: {
      if (!config.explicit_init) {
        throw ConfigError("run: Explicit init policy needs a matrix");
      }
      const Matrix& h0 = *config.explicit_init;
      if (h0.rows() != d || h0.cols() != d) {
        throw ConfigError("run: explicit init matrix has wrong dimensions");
      }
      detail::require_finite(h0, "run");
      detail::require_symmetric(h0, "run");
      Eigen::LLT<Matrix> llt(h0);
      if (llt.info() != Eigen::Success) {
        throw NotPositiveDefiniteError("run: explicit init matrix is not positive definite");
      }
      state.H = symmetrized(h0);
      if (config.track_B) state.B = symmetrized(solve_spd(h0, Matrix(Matrix::Identity(d, d))));
      break;
    }
  }
}

}  // namespace

OptState make_initial_state(const Objective& obj, const OptimizerConfig& config) {
  OptState state;
  state.x = config.x0;
  state.grad = obj.gradient(state.x);
  initialize_state(obj, config, state);
  return state;
}

namespace {

Vector search_direction(const Objective& obj, const OptState& state,
                        const OptimizerConfig& config) {
  switch (config.method) {
    case Method::DFP:
    case Method::BFGS:
      return -(state.H * state.grad);
    case Method::Newton: {
      if (obj.hessian_is_diagonal() && !config.dense_newton) {
        const Vector hd = obj.hessian_diagonal(state.x);
        if (hd.minCoeff() <= 0.0) {
          throw NotPositiveDefiniteError("step: Hessian is not positive definite");
        }
        return -(state.grad.cwiseQuotient(hd));
      }
      return -solve_spd(obj.hessian(state.x), state.grad);
    }
    case Method::GradientDescent:
      return -config.gd_step * state.grad;
  }
  throw ConfigError("step: unknown method");
}

}  // namespace

StepStatus step(const Objective& obj, OptState& state, const OptimizerConfig& config,
                IterateRecord& record) {
  const Vector dir = search_direction(obj, state, config);
  if (!dir.allFinite()) {
    throw NonFiniteError("step: search direction has NaN or Inf entries");
  }
  if (dir.norm() <= config.stop_step_tol * (1.0 + state.x.norm())) {
    return StepStatus::StepZero;
  }

  const Vector xn = state.x + dir;
  const Vector gn = obj.gradient(xn);
  record.s = dir;
  record.has_step = true;
  if (!xn.allFinite() || !gn.allFinite()) {
    throw NonFiniteError("step: iterate or gradient overflowed");
  }
  record.y = gn - state.grad;

  if (config.method == Method::DFP) {
    state.H = dfp_update_H(state.H, record.s, record.y);
    if (config.track_B) state.B = dfp_update_B(state.B, record.s, record.y);
  } else if (config.method == Method::BFGS) {
    state.H = bfgs_update_H(state.H, record.s, record.y);
  }

  record.step_accepted = true;
  state.x = xn;
  state.grad = gn;
  state.k += 1;
  return StepStatus::Stepped;
}

Trace run(const Objective& obj, const OptimizerConfig& config) {
  if (config.x0.size() != obj.dim()) {
    throw ConfigError("run: x0 dimension does not match the objective");
  }
  if (!config.x0.allFinite()) {
    throw ConfigError("run: x0 has NaN or Inf entries");
  }
  if (config.max_iters < 0) {
    throw ConfigError("run: max_iters must be nonnegative");
  }
  if (config.method == Method::GradientDescent && !(config.gd_step > 0.0)) {
    throw ConfigError("run: gradient descent needs a positive gd_step");
  }

  Trace trace;
  trace.config = config;
  trace.objective_id = obj.name();
  trace.mu = obj.mu();
  trace.lip_grad = obj.lip_grad();
  trace.lip_hess = obj.lip_hess();
  trace.radius = obj.radius();

  const double dist0 = (config.x0 - obj.optimum()).norm();
  if (dist0 > obj.radius()) {
    trace.warnings.push_back("x0 lies outside the certified ball (distance " +
                             std::to_string(dist0) + " > radius " +
                             std::to_string(obj.radius()) + ")");
  }

  OptState state;
  state.x = config.x0;
  state.grad = obj.gradient(state.x);

  const bool keep_matrices = obj.dim() <= config.matrix_record_cap;

  auto snapshot = [&](IterateRecord& rec) {
    rec.k = state.k;
    rec.x = state.x;
    rec.grad = state.grad;
    if (keep_matrices && uses_inverse_approx(config.method)) {
      rec.H = state.H;
      if (config.track_B) rec.B = state.B;
    }
  };

  if (!state.grad.allFinite()) {
    IterateRecord rec;
    snapshot(rec);
    trace.records.push_back(std::move(rec));
    trace.termination = Termination::NumericalBreakdown;
    trace.breakdown_reason = "gradient at x0 has NaN or Inf entries";
    return trace;
  }

  try {
    initialize_state(obj, config, state);
  } catch (const NotPositiveDefiniteError& e) {
    IterateRecord rec;
    snapshot(rec);
    trace.records.push_back(std::move(rec));
    trace.termination = Termination::NumericalBreakdown;
    trace.breakdown_reason = e.what();
    return trace;
  }

  while (true) {
    IterateRecord rec;
    snapshot(rec);

    if (config.stop_grad_tol > 0.0 && state.grad.norm() <= config.stop_grad_tol) {
      trace.records.push_back(std::move(rec));
      trace.termination = Termination::GradTol;
      break;
    }
    if (state.k >= config.max_iters) {
      trace.records.push_back(std::move(rec));
      trace.termination = Termination::MaxIters;
      break;
    }

    try {
      const StepStatus status = step(obj, state, config, rec);
      trace.records.push_back(std::move(rec));
      if (status == StepStatus::StepZero) {
        trace.termination = Termination::StepZero;
        break;
      }
    } catch (const LinalgError& e) {
      // The failed step's partial record (s, and y when reached) is kept:
      // breakdowns near the floating point floor are data, not crashes.
      trace.records.push_back(std::move(rec));
      trace.termination = Termination::NumericalBreakdown;
      trace.breakdown_reason = e.what();
      break;
    }
  }
  return trace;
}

}  // namespace qnlab
