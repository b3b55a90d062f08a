#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnlab/optimizer.hpp"

namespace qnlab {

// Cached square roots of the Hessian at the optimum, i.e. the congruence
// weights that turn iterates into the frame where that Hessian is the
// identity. A diagonal fast path keeps per-vector work at O(d) and lets
// d = 3000 runs be instrumented without forming dense roots.
struct MetricContext {
  Vector xstar;
  double mu = 0.0;        // strong convexity constant of the objective
  double hess_lip = 0.0;  // Lipschitz constant of the Hessian at the optimum

  // Hatted matrices are materialized only up to this dimension; above it
  // frames carry vector quantities and potentials only.
  int audit_cap = 200;

  bool diagonal = false;
  Vector hstar_diag, half_diag, neg_half_diag;  // diagonal weights
  Matrix hstar, half, neg_half;                 // dense weights (empty when diagonal)

  Eigen::Index dim() const { return xstar.size(); }

  Vector apply_half(const Vector& v) const;      // Hstar^{1/2} v
  Vector apply_neg_half(const Vector& v) const;  // Hstar^{-1/2} v
  Matrix congruence_half(const Matrix& a) const;      // Hstar^{1/2} A Hstar^{1/2}
  Matrix congruence_neg_half(const Matrix& a) const;  // Hstar^{-1/2} A Hstar^{-1/2}

  // Frobenius distance of the congruence-transformed matrix from the
  // identity, computed without materializing the product.
  double identity_distance_half(const Matrix& a) const;
  double identity_distance_neg_half(const Matrix& a) const;

  // Scaled distance to the optimum: (M / mu^{3/2}) ||r||.
  double sigma_of(double r_norm) const;
};

// Requires a positive definite Hessian at the optimum.
MetricContext build_context(const Objective& obj, int audit_cap = 200);

// One iterate viewed through the weights: r is the weighted distance to the
// optimum, sigma its scaling, tau the two-step max of sigma (undefined for
// the final iterate, which has no successor). Matrices and potentials are
// present only when the source record carried them or replay supplied them.
struct WeightedFrame {
  int k = 0;
  bool has_step = false;  // complete (s, y) pair recorded

  Vector r, grad_hat, s_hat, y_hat;
  double r_norm = 0.0;
  double sigma = 0.0;
  std::optional<double> tau;

  std::optional<Matrix> B_hat, H_hat;
  std::optional<double> potential_B;  // ||B_hat - I||_F
  std::optional<double> potential_H;  // ||H_hat - I||_F
};

// Instruments one record; next supplies the successor iterate for tau.
WeightedFrame frame(const MetricContext& ctx, const IterateRecord& rec,
                    const IterateRecord* next = nullptr);

struct ReplayOptions {
  // Reconstruct Hessian approximations from the recorded (s, y) sequence
  // when the trace did not store them, so potentials exist at any dimension.
  bool with_potentials = true;
};

// Frames for a whole trace. Reconstruction reruns the exact update code on
// the recorded steps, so replayed matrices equal the run's bit for bit.
std::vector<WeightedFrame> replay_frames(const Objective& obj, const Trace& trace,
                                         const MetricContext& ctx,
                                         const ReplayOptions& opts = {});

struct InequalityCheck {
  double lhs = 0.0, rhs = 0.0, slack = 0.0;  // slack = rhs - lhs
  bool pass = false;
};

// The step/gradient variation inequalities in the weighted frame. They are
// only claimed for tau < 1; outside that the report is marked inapplicable
// rather than failed.
struct SecantFrameReport {
  bool applicable = false;
  std::string reason;  // set when not applicable
  double tau = 0.0, sigma = 0.0;

  InequalityCheck difference;   // ||y_hat - s_hat||      <= tau ||s_hat||
  InequalityCheck inner_low;    // (1 - tau) ||s_hat||^2  <= s_hat . y_hat
  InequalityCheck inner_high;   // s_hat . y_hat          <= (1 + tau) ||s_hat||^2
  InequalityCheck length_low;   // (1 - tau) ||s_hat||    <= ||y_hat||
  InequalityCheck length_high;  // ||y_hat||              <= (1 + tau) ||s_hat||
  InequalityCheck gradient;     // ||grad_hat - r||       <= sigma ||r||
  bool pass = false;
};

SecantFrameReport secant_frame_report(const WeightedFrame& f);

}  // namespace qnlab
