#include "iptr/negcurve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "iptr/errors.hpp"

namespace iptr {

namespace {

constexpr int kRadiusRetries = 5;

// Orthogonal projector onto ker(AX) applied to z.
struct KernelProjector {
  const Matrix& A;
  const Vector& x;
  Eigen::LLT<Matrix> K;

  KernelProjector(const Matrix& a, const Vector& xx)
      : A{a}, x{xx}, K{factor_weighted_gram(a, xx.cwiseAbs2())} {}

  Vector operator()(const Vector& z) const {
    const Vector v = K.solve(A * x.cwiseProduct(z));
    return z - x.cwiseProduct(A.transpose() * v);
  }
};

}  // namespace

NcfParams ncf_params(const ProblemInstance& instance, double epsilon, double delta0) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(delta0 > 0.0 && delta0 < 1.0)) throw DomainError("delta0 must lie in (0, 1)");
  const auto& c = instance.constants;
  const double n = static_cast<double>(instance.n());
  const double se = std::sqrt(epsilon);
  NcfParams p;
  p.delta0 = delta0;
  p.k = instance.n() - instance.m();
  const double arg = 8.0 * c.l / delta0 * std::sqrt(n / (std::numbers::pi * epsilon));
  p.calT = static_cast<long>(std::ceil(8.0 * c.l / se * std::log(std::max(arg, 1.0 + 1e-12))));
  p.calT = std::max(1L, p.calT);
  const double base = 0.5 * (1.0 + 7.0 * se / (8.0 * c.l));
  const double k = static_cast<double>(std::max<Index>(p.k, 1));
  double r = std::pow(base, static_cast<double>(p.calT)) / (8.0 * c.rho) *
             std::sqrt(std::numbers::pi * epsilon / k) * delta0;
  if (!(r >= kMinProbeRadius)) r = kMinProbeRadius;
  if (r >= 1.0) r = 0.5;
  p.r = r;
  return p;
}

CurvatureResult find_negative_curvature(const ProblemInstance& instance, const Vector& x,
                                        double epsilon, const NcfParams& params, uint64_t seed) {
  if (!(params.r > 0.0 && params.r < 1.0)) throw DomainError("probe radius must lie in (0, 1)");
  if (params.calT < 1) throw DomainError("power iteration count must be positive");
  const Index n = instance.n();
  CurvatureResult res;
  res.r_used = params.r;
  if (n - instance.m() <= 0) return res;

  const KernelProjector P(instance.A, x);
  const Vector g0 = instance.grad(x);
  const double l = instance.constants.l;
  const double r = params.r;
  const double tau = std::min(r, 1e-4);

  // P X (∇f(X(e + s·v)) − ∇f(x)) for unit v.
  Vector probe(n);
  auto response = [&](const Vector& v, double s) {
    probe = x.array() * (1.0 + s * v.array());
    if (!((probe.array() > 0.0).all())) {
      throw OrthantExitError("curvature probe left the positive orthant at radius " +
                             std::to_string(s));
    }
    return P(x.cwiseProduct(instance.grad(probe) - g0));
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = gauss(rng);
  y = P(y);
  double norm = y.norm();
  if (!(norm > 0.0)) throw NumericalError("degenerate start vector for the power iteration");
  y /= norm;

  double best = std::numeric_limits<double>::infinity();
  Vector best_v;
  for (long t = 0; t < params.calT; ++t) {
    // y is kept at unit norm; the update is homogeneous in y.
    const Vector F = response(y, r);
    const double score = tau == r ? y.dot(F) / r : y.dot(response(y, tau)) / tau;
    if (score < best) {
      best = score;
      best_v = y;
    }
    y -= F / (l * r);
    if (t % 64 == 63) y = P(y);
    norm = y.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw NumericalError("power iteration collapsed");
    }
    y /= norm;
  }
  res.iterations = params.calT;
  {
    const double score = y.dot(response(y, tau)) / tau;
    if (score < best) {
      best = score;
      best_v = y;
    }
  }
  res.rayleigh = best;
  res.e_hat = best_v;
  res.found = best <= -std::sqrt(epsilon) / 4.0;
  return res;
}

CurvatureResult find_negative_curvature_retry(const ProblemInstance& instance, const Vector& x,
                                              double epsilon, NcfParams params, uint64_t seed) {
  for (int attempt = 0;; ++attempt) {
    try {
      return find_negative_curvature(instance, x, epsilon, params, seed);
    } catch (const OrthantExitError&) {
      if (attempt >= kRadiusRetries) throw;
      params.r *= 0.5;
    }
  }
}

double oracle_rayleigh(const ProblemInstance& instance, const Vector& x, const Vector& v) {
  const Vector xv = x.cwiseProduct(v);
  return xv.dot(instance.hessian(x) * xv);
}

double curvature_decrease_bound(double epsilon, double rho) {
  return 9.0 * std::pow(epsilon, 1.5) / (1024.0 * rho * rho);
}

Vector curvature_descent_step(const ProblemInstance& instance, const Vector& x,
                              const Vector& e_hat, double epsilon, double rho) {
  const double s = 3.0 * std::sqrt(epsilon) / (8.0 * rho);
  if (!(s < 1.0)) {
    throw OrthantExitError("curvature step length 3 sqrt(eps)/(8 rho) = " + std::to_string(s) +
                           " is not below 1; revise the constants");
  }
  const Vector xe = x.cwiseProduct(e_hat);
  const double sign = instance.grad(x).dot(xe) < 0.0 ? -1.0 : 1.0;
  Vector out = x - sign * s * xe;
  if (!((out.array() > 0.0).all())) {
    throw OrthantExitError("curvature step left the positive orthant");
  }
  return out;
}

}  // namespace iptr
