#include "qnlab/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qnlab {

double pow_int(double x, unsigned e) {
  double acc = 1.0;
  double base = x;
  while (e > 0) {
    if (e & 1u) acc *= base;
    base *= base;
    e >>= 1u;
  }
  return acc;
}

Vector Objective::hessian_diagonal(const Vector&) const {
  throw DimensionError("hessian_diagonal: objective has no diagonal Hessian");
}

namespace {

class SeparableBuiltin final : public Objective {
 public:
  SeparableBuiltin(std::string name, unsigned p, double a, int dim, double radius)
      : name_(std::move(name)), p_(p), a_(a), dim_(dim), radius_(radius) {
    if (dim < 1) throw InvalidDimError("make_builtin: dim must be >= 1");
    if (!(radius > 0.0)) throw InvalidDimError("make_builtin: radius must be > 0");
  }

  std::string name() const override { return name_; }
  int dim() const override { return dim_; }

  double value(const Vector& x) const override {
    check(x);
    double v = pow_int(x(0), p_) + a_ * x(0) * x(0);
    for (int i = 1; i < dim_; ++i) v += x(i) * x(i);
    return v;
  }

  Vector gradient(const Vector& x) const override {
    check(x);
    Vector g = 2.0 * x;
    g(0) = double(p_) * pow_int(x(0), p_ - 1) + 2.0 * a_ * x(0);
    return g;
  }

  Matrix hessian(const Vector& x) const override {
    return hessian_diagonal(x).asDiagonal();
  }

  bool hessian_is_diagonal() const override { return true; }

  Vector hessian_diagonal(const Vector& x) const override {
    check(x);
    Vector h = Vector::Constant(dim_, 2.0);
    h(0) = double(p_) * double(p_ - 1) * pow_int(x(0), p_ - 2) + 2.0 * a_;
    return h;
  }

  Vector optimum() const override { return Vector::Zero(dim_); }

  // Curvature along x1 is p(p-1)x1^{p-2} + 2a, rising from 2a at the optimum
  // to its maximum on the ball boundary; every other coordinate contributes
  // a flat 2. The lip_hess ratio is maximized on the x1 axis.
  double mu() const override { return dim_ > 1 ? std::min(2.0, 2.0 * a_) : 2.0 * a_; }

  double lip_grad() const override {
    const double h1 = double(p_) * double(p_ - 1) * pow_int(radius_, p_ - 2) + 2.0 * a_;
    return dim_ > 1 ? std::max(2.0, h1) : h1;
  }

  double lip_hess() const override {
    return double(p_) * double(p_ - 1) * pow_int(radius_, p_ - 3);
  }

  double radius() const override { return radius_; }

 private:
  void check(const Vector& x) const {
    if (x.size() != dim_) throw DimensionError("objective: point has wrong dimension");
  }

  std::string name_;
  unsigned p_;
  double a_;
  int dim_;
  double radius_;
};

class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(const Matrix& a, const Vector& b, double radius)
      : a_(a), b_(b), radius_(radius) {
    detail::require_square(a, "make_quadratic");
    detail::require_finite(a, "make_quadratic");
    detail::require_symmetric(a, "make_quadratic");
    if (b.size() != a.rows()) throw DimensionError("make_quadratic: b size does not match A");
    if (!(radius > 0.0)) throw InvalidDimError("make_quadratic: radius must be > 0");
    SpectralFactorization f = spectral_factor(a);
    lmax_ = f.eigenvalues(0);
    lmin_ = f.eigenvalues(f.eigenvalues.size() - 1);
    if (lmin_ <= tol::kPositiveDefiniteRel * lmax_ || !(lmax_ > 0.0)) {
      throw NotPositiveDefiniteError("make_quadratic: A must be positive definite");
    }
    xstar_ = solve_spd(a_, b_);
    diagonal_ = a_.isDiagonal(0.0);
  }

  std::string name() const override { return "quadratic"; }
  int dim() const override { return int(a_.rows()); }
  double value(const Vector& x) const override { return 0.5 * x.dot(a_ * x) - b_.dot(x); }
  Vector gradient(const Vector& x) const override { return a_ * x - b_; }
  Matrix hessian(const Vector&) const override { return a_; }
  bool hessian_is_diagonal() const override { return diagonal_; }
  Vector hessian_diagonal(const Vector& x) const override {
    if (!diagonal_) return Objective::hessian_diagonal(x);
    return a_.diagonal();
  }
  Vector optimum() const override { return xstar_; }
  double mu() const override { return lmin_; }
  double lip_grad() const override { return lmax_; }
  double lip_hess() const override { return 0.0; }
  double radius() const override { return radius_; }

 private:
  Matrix a_;
  Vector b_;
  Vector xstar_;
  double radius_;
  double lmin_ = 0.0, lmax_ = 0.0;
  bool diagonal_ = false;
};

// Deterministic quasi-random point set in the ball around the optimum:
// the two x1-axis boundary points first (the separable builtins attain their
// curvature extremes there), the optimum itself, a few more axis points, then
// a Kronecker additive-recurrence sequence folded into the ball.
std::vector<Vector> certification_points(const Objective& obj, double radius, int n) {
  const int d = obj.dim();
  const Vector xstar = obj.optimum();
  std::vector<Vector> pts;
  pts.reserve(size_t(n));

  auto push_axis = [&](int axis, double sgn) {
    Vector x = xstar;
    x(axis) += sgn * radius;
    pts.push_back(std::move(x));
  };
  push_axis(0, +1.0);
  if (int(pts.size()) < n) push_axis(0, -1.0);
  if (int(pts.size()) < n) pts.push_back(xstar);
  for (int axis = 1; axis < std::min(d, 8) && int(pts.size()) + 1 < n; ++axis) {
    push_axis(axis, +1.0);
    push_axis(axis, -1.0);
  }

  // alpha_i = frac(sqrt(p_i)) over the first d primes
  std::vector<double> alpha(static_cast<size_t>(d));
  {
    int found = 0;
    for (int cand = 2; found < d; ++cand) {
      bool prime = true;
      for (int q = 2; q * q <= cand; ++q) {
        if (cand % q == 0) { prime = false; break; }
      }
      if (prime) {
        double r = std::sqrt(double(cand));
        alpha[size_t(found++)] = r - std::floor(r);
      }
    }
  }
  for (int j = 1; int(pts.size()) < n; ++j) {
    Vector z(d);
    for (int i = 0; i < d; ++i) {
      const double u = std::fmod(double(j) * alpha[size_t(i)], 1.0);
      z(i) = 2.0 * u - 1.0;
    }
    const double nz = z.norm();
    if (nz > 1.0) z /= nz;
    pts.push_back(xstar + radius * z);
  }
  pts.resize(size_t(n));
  return pts;
}

// lambda_min, lambda_max, and ||hessian(x) - hessian(x*)|| for one sample,
// via the diagonal when available.
struct HessianSample {
  double lmin, lmax, dist;
};

HessianSample sample_hessian(const Objective& obj, const Vector& x, const Vector& hstar_diag,
                             const Matrix& hstar_dense) {
  if (obj.hessian_is_diagonal()) {
    const Vector h = obj.hessian_diagonal(x);
    return {h.minCoeff(), h.maxCoeff(), (h - hstar_diag).cwiseAbs().maxCoeff()};
  }
  const Matrix h = obj.hessian(x);
  SpectralFactorization f = spectral_factor(h);
  return {f.eigenvalues(f.eigenvalues.size() - 1), f.eigenvalues(0),
          spectral_norm(h - hstar_dense)};
}

}  // namespace

std::unique_ptr<Objective> make_builtin(BuiltinKind kind, int dim, double radius) {
  switch (kind) {
    case BuiltinKind::F1: return std::make_unique<SeparableBuiltin>("f1", 4u, 1.0, dim, radius);
    case BuiltinKind::F2: return std::make_unique<SeparableBuiltin>("f2", 40u, 100.0, dim, radius);
    case BuiltinKind::F3: return std::make_unique<SeparableBuiltin>("f3", 400u, 10000.0, dim, radius);
  }
  throw InvalidDimError("make_builtin: unknown kind");
}

std::unique_ptr<Objective> make_quadratic(const Matrix& a, const Vector& b, double radius) {
  return std::make_unique<QuadraticObjective>(a, b, radius);
}

ConstantsCertificate certify_constants(const Objective& obj, double radius, int samples) {
  if (samples < 1) throw InvalidDimError("certify_constants: need at least one sample");
  if (!(radius > 0.0)) throw InvalidDimError("certify_constants: radius must be > 0");

  const Vector xstar = obj.optimum();
  Vector hstar_diag;
  Matrix hstar_dense;
  if (obj.hessian_is_diagonal()) {
    hstar_diag = obj.hessian_diagonal(xstar);
  } else {
    hstar_dense = obj.hessian(xstar);
  }

  ConstantsCertificate cert;
  cert.radius = radius;
  cert.samples = samples;
  cert.mu_hat = std::numeric_limits<double>::infinity();
  cert.L_hat = 0.0;
  cert.M_hat = 0.0;

  for (const Vector& x : certification_points(obj, radius, samples)) {
    const HessianSample hs = sample_hessian(obj, x, hstar_diag, hstar_dense);
    cert.mu_hat = std::min(cert.mu_hat, hs.lmin);
    cert.L_hat = std::max(cert.L_hat, hs.lmax);
    const double dx = (x - xstar).norm();
    if (dx > 0.0) cert.M_hat = std::max(cert.M_hat, hs.dist / dx);
  }

  // The stored constants claim mu <= lambda <= L and the lip_hess ratio bound;
  // a sample outside those ranges (beyond slack) falsifies the claim.
  const double slack = 1e-9;
  cert.mu_ok = cert.mu_hat >= obj.mu() * (1.0 - slack);
  cert.L_ok = cert.L_hat <= obj.lip_grad() * (1.0 + slack);
  cert.M_ok = cert.M_hat <= obj.lip_hess() * (1.0 + slack) + slack;
  return cert;
}

LinearizationReport check_gradient_linearization_bound(const Objective& obj, const Vector& x,
                                                       const Vector& y) {
  const Vector xstar = obj.optimum();
  Vector hx;
  if (obj.hessian_is_diagonal()) {
    hx = obj.hessian_diagonal(xstar).cwiseProduct(x - y);
  } else {
    hx = obj.hessian(xstar) * (x - y);
  }
  LinearizationReport rep;
  rep.lhs = (obj.gradient(x) - obj.gradient(y) - hx).norm();
  rep.rhs = obj.lip_hess() * (x - y).norm() *
            std::max((x - xstar).norm(), (y - xstar).norm());
  // The residual subtracts terms as large as lip_grad times the distances,
  // so rounding noise scales with that product, not with the bound itself.
  const double noise =
      obj.lip_grad() * ((x - xstar).norm() + (y - xstar).norm());
  rep.pass = rep.lhs <= rep.rhs + tol::kLinearizationSlack * std::max(1.0, noise);
  return rep;
}

}  // namespace qnlab
