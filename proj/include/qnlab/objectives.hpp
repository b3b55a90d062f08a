#pragma once

#include <memory>
#include <string>

#include "qnlab/linalg.hpp"

namespace qnlab {

// Strongly convex objective with analytic derivatives and local constants
// certified on the ball ||x - optimum()|| <= radius():
//   mu        strong convexity lower bound,
//   lip_grad  gradient Lipschitz upper bound (L >= mu),
//   lip_hess  bound on ||hessian(x) - hessian(x*)|| / ||x - x*||.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Matrix hessian(const Vector& x) const = 0;
  virtual Vector optimum() const = 0;

  virtual double mu() const = 0;
  virtual double lip_grad() const = 0;
  virtual double lip_hess() const = 0;
  virtual double radius() const = 0;

  // Diagonal-Hessian fast path; hessian_diagonal throws DimensionError when
  // the Hessian is not diagonal.
  virtual bool hessian_is_diagonal() const { return false; }
  virtual Vector hessian_diagonal(const Vector& x) const;
};

// The separable test family: x1^p + a*x1^2 + sum_{i>=2} x_i^2, minimized at 0.
//   F1: p = 4,   a = 1
//   F2: p = 40,  a = 100
//   F3: p = 400, a = 10000
enum class BuiltinKind { F1, F2, F3 };

struct InvalidDimError : LinalgError {
  using LinalgError::LinalgError;
};

// radius fixes the ball on which mu/lip_grad/lip_hess are stated.
std::unique_ptr<Objective> make_builtin(BuiltinKind kind, int dim, double radius);

// value = 0.5 x^T A x - b^T x with A SPD; optimum solves A x = b; constants
// mu = lambda_min(A), L = lambda_max(A), lip_hess = 0.
std::unique_ptr<Objective> make_quadratic(const Matrix& a, const Vector& b,
                                          double radius = 1.0);

// x^e by repeated squaring; underflow/overflow follow IEEE semantics.
double pow_int(double x, unsigned e);

// Sampled certification of the stored constants over the ball of the given
// radius. Deterministic: axis boundary points plus a Kronecker
// low-discrepancy sequence.
struct ConstantsCertificate {
  double radius = 0.0;
  int samples = 0;
  double mu_hat = 0.0;   // min lambda_min(hessian) over samples
  double L_hat = 0.0;    // max lambda_max(hessian)
  double M_hat = 0.0;    // max ||hessian(x) - hessian(x*)|| / ||x - x*||
  bool mu_ok = false;    // sampled values do not violate the stored constants
  bool L_ok = false;
  bool M_ok = false;
  bool pass() const { return mu_ok && L_ok && M_ok; }
};

ConstantsCertificate certify_constants(const Objective& obj, double radius, int samples);

// Checks ||grad(x) - grad(y) - hessian(x*)(x - y)||
//          <= lip_hess * ||x - y|| * max(||x - x*||, ||y - x*||),
// up to a rounding allowance that scales with lip_grad times the distances
// (the size of the terms the residual cancels).
struct LinearizationReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

LinearizationReport check_gradient_linearization_bound(const Objective& obj,
                                                       const Vector& x,
                                                       const Vector& y);

}  // namespace qnlab
