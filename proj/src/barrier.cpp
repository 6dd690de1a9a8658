#include "iptr/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iptr/errors.hpp"

namespace iptr {

namespace {

double neg_log_sum(const Vector& x) { return -x.array().log().sum(); }

void require_positive(const Vector& x) {
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) {
      throw DomainError("potential evaluated at non-positive coordinate " + std::to_string(i));
    }
  }
}

}  // namespace

PotentialContext::PotentialContext(const ProblemInstance& inst, double eps)
    : instance{&inst}, epsilon{eps} {
  const double cap = std::min(inst.constants.gamma, 1.0);
  if (!(eps > 0.0 && eps <= cap)) {
    throw DomainError("epsilon must lie in (0, min{gamma, 1}] = (0, " + std::to_string(cap) +
                      "], got " + std::to_string(eps));
  }
}

double potential_eval(const PotentialContext& ctx, const Vector& x) {
  require_positive(x);
  return ctx.instance->eval(x) + ctx.epsilon * neg_log_sum(x);
}

Vector potential_grad(const PotentialContext& ctx, const Vector& x) {
  require_positive(x);
  return ctx.instance->grad(x) - ctx.epsilon * x.cwiseInverse();
}

Vector scaled_potential_grad(const Vector& x, const Vector& grad_f, double epsilon) {
  return (x.cwiseProduct(grad_f).array() - epsilon).matrix();
}

bool barrier_step_bound_check(const Vector& x, const Vector& d, double beta) {
  if (x.size() != d.size() || !(beta < 1.0) || d.norm() > beta * (1.0 + 1e-12)) return false;
  const double lhs = -(d.array().log1p()).sum();
  const double rhs = -d.sum() + beta * beta / (2.0 * (1.0 - beta));
  return lhs <= rhs + 1e-12 * (1.0 + std::abs(rhs));
}

CenterResult analytic_center(const Matrix& A, const Vector& b, const Vector& x_start, double tol) {
  if (x_start.size() != A.cols() || b.size() != A.rows()) {
    throw DomainError("dimension mismatch in analytic_center");
  }
  if (!(tol > 0.0 && tol <= 0.5)) throw DomainError("analytic_center: tol must lie in (0, 1/2]");
  if ((x_start.array() <= 0.0).any()) throw DomainError("analytic_center: start not positive");
  if ((A * x_start - b).norm() > 1e-9 * (1.0 + b.norm())) {
    throw DomainError("analytic_center: start violates A x = b");
  }

  const Index n = A.cols();
  Vector x = x_start;
  double lambda = 0.0;
  int it = 0;
  for (; it < 500; ++it) {
    // Newton step in scaled coordinates is the projection of e onto ker(AX).
    Vector d = project_exact(A, x, x.cwiseInverse());
    lambda = d.norm();
    if (lambda <= tol) break;
    double step = 1.0 / (1.0 + lambda);
    const double f0 = neg_log_sum(x);
    int halvings = 0;
    Vector xn;
    while (true) {
      xn = x + step * x.cwiseProduct(d);
      if ((xn.array() > 0.0).all() && neg_log_sum(xn) < f0 + 1e-14 * (1.0 + std::abs(f0))) break;
      if (++halvings > 100) throw NumericalError("analytic_center: line search failed");
      step *= 0.5;
    }
    x = xn;
  }
  if (lambda > tol) {
    throw NumericalError("analytic_center: decrement " + std::to_string(lambda) +
                         " above tolerance after iteration cap");
  }
  // Pull back onto A x = b against drift.
  x -= x.cwiseAbs2().asDiagonal() * A.transpose() *
       factor_weighted_gram(A, x.cwiseAbs2()).solve(A * x - b);
  if ((x.array() <= 0.0).any()) throw NumericalError("analytic_center: lost positivity");

  CenterResult out;
  out.x0 = x;
  out.decrement = lambda;
  out.iterations = it;
  out.c0 = static_cast<double>(n) * (-lambda - std::log1p(-lambda));
  return out;
}

}  // namespace iptr
