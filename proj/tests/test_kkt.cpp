#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "iptr/errors.hpp"
#include "iptr/kkt.hpp"
#include "oracle.hpp"

using namespace iptr;

namespace {

Vector v3(double a, double b, double c) {
  Vector x(3);
  x << a, b, c;
  return x;
}

// f(x) = cᵀx on {x₁ + x₂ = 1}.
ProblemInstance linear_pair(double c1, double c2) {
  ProblemInstance p;
  p.name = "linear";
  p.A = Matrix::Ones(1, 2);
  p.b = Vector::Ones(1);
  p.objective.kind = ObjectiveKind::kQuartic;
  p.objective.sigma = 0.0;
  p.objective.Q = Matrix::Zero(2, 2);
  p.objective.c = Vector(2);
  p.objective.c << c1, c2;
  p.x0 = Vector::Constant(2, 0.5);
  return p;
}

// Least-squares multiplier for a single constraint row a: v = −Σ aᵢxᵢwᵢ / Σ (aᵢxᵢ)².
double single_row_multiplier(const Vector& a, const Vector& x, const Vector& w) {
  const Vector ax = a.cwiseProduct(x);
  return -ax.dot(w) / ax.squaredNorm();
}

}  // namespace

TEST(Kkt1, LinearPairCertifiedWhenCostsEqual) {
  const ProblemInstance p = linear_pair(1.0, 1.0);
  for (double eps : {0.01, 0.1}) {
    const KktReport r = check_kkt1(p, p.x0, eps);
    // v = −(1 − 2ε), dual = 2ε·e, X·dual = ε·e.
    EXPECT_NEAR(r.v[0], -(1.0 - 2.0 * eps), 1e-14);
    EXPECT_NEAR(r.stationarity_inf, eps, 1e-14);
    EXPECT_NEAR(r.dual_min, 2.0 * eps, 1e-14);
    EXPECT_TRUE(r.kkt1_certified());
    EXPECT_FALSE(r.projected_min_eig.has_value());
    EXPECT_FALSE(r.kkt2_certified());
  }
}

TEST(Kkt1, LinearPairRejectedWhenCostsDiffer) {
  const ProblemInstance p = linear_pair(1.0, 2.0);
  const double eps = 0.05;
  const KktReport r = check_kkt1(p, p.x0, eps);
  // dual = (−½ + 2ε, ½ + 2ε), stationarity ¼ + ε.
  EXPECT_NEAR(r.stationarity_inf, 0.25 + eps, 1e-14);
  EXPECT_NEAR(r.dual_min, -0.5 + 2.0 * eps, 1e-14);
  EXPECT_FALSE(r.kkt1_certified());
}

TEST(Kkt1, Fig2SaddlePasses) {
  const ProblemInstance p = builtin_fig2();
  const Vector x = v3(0.5, 0.25, 0.25);
  const double eps = 0.05;
  const KktReport r = check_kkt1(p, x, eps);
  const double v = single_row_multiplier(Vector::Ones(3), x, -eps * Vector::Ones(3));
  EXPECT_NEAR(r.v[0], v, 1e-14);
  EXPECT_NEAR(r.stationarity_inf, 0.5 * v, 1e-14);
  EXPECT_TRUE(r.kkt1_certified());
}

TEST(Kkt1, Fig2CentroidFailsAtSmallEpsilon) {
  const ProblemInstance p = builtin_fig2();
  const Vector x = Vector::Constant(3, 1.0 / 3.0);
  const double eps = 0.01;
  const KktReport r = check_kkt1(p, x, eps);
  const Vector g = v3(80.0 * (1.0 / 3.0 - 0.5), 0.0, 0.0);
  const Vector w = x.cwiseProduct(g) - eps * Vector::Ones(3);
  const double v = single_row_multiplier(Vector::Ones(3), x, w);
  const Vector dual = g + v * Vector::Ones(3);
  EXPECT_NEAR(r.v[0], v, 1e-12);
  EXPECT_NEAR(r.stationarity_inf, x.cwiseProduct(dual).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(r.stationarity_inf, 1.0);
  EXPECT_FALSE(r.kkt1_certified());
}

TEST(Kkt1, FeasibilityAndInteriorChecks) {
  const ProblemInstance p = builtin_fig2();
  const KktReport r = check_kkt1(p, v3(0.5, 0.25, 0.25 + 1e-6), 0.05);
  EXPECT_NEAR(r.feasibility_res, 1e-6, 1e-15);
  EXPECT_FALSE(r.feasible());
  EXPECT_FALSE(r.kkt1_certified());
  EXPECT_THROW(check_kkt1(p, v3(0.5, 0.5, 0.0), 0.05), DomainError);
  EXPECT_THROW(check_kkt1(p, Vector::Ones(2), 0.05), DomainError);
}

TEST(Kkt1, MultiplierIsLeastSquaresOptimal) {
  const ProblemInstance p = gen_quartic(12, 5, 1.0, 21);
  std::mt19937_64 rng(61);
  const Vector x = oracle::random_positive(12, rng);
  const double eps = 0.1;
  const KktReport r = check_kkt1(p, x, eps);
  const Vector w = x.cwiseProduct(p.grad(x)) - eps * Vector::Ones(12);
  const auto resid = [&](const Vector& v) { return (w + x.cwiseProduct(p.A.transpose() * v)).norm(); };
  const double best = resid(r.v);
  for (int k = 0; k < 100; ++k) {
    const Vector dv = 1e-3 * oracle::random_vector(5, rng);
    EXPECT_GE(resid(r.v + dv), best);
  }
  // Normal equations: (AX)(w + XAᵀv) = 0.
  const Vector ne = p.A * x.cwiseProduct(w + x.cwiseProduct(p.A.transpose() * r.v));
  EXPECT_LE(ne.norm(), 1e-9 * std::max(1.0, w.norm()));
}

TEST(Kkt2, Fig2MinimumCertified) {
  const ProblemInstance p = builtin_fig2();
  const Vector x = v3(0.5, 0.375, 0.125);
  const double eps = 0.04;
  const KktReport r = check_kkt2(p, x, eps);
  ASSERT_TRUE(r.projected_min_eig.has_value());
  const double oracle_min = oracle::jacobi_eigen(oracle::projected_scaled(p.hessian(x), p.A, x)).first[0];
  EXPECT_GT(oracle_min, 0.0);
  EXPECT_NEAR(*r.projected_min_eig, oracle_min, 1e-4);
  EXPECT_FALSE(r.unreliable);
  EXPECT_TRUE(r.kkt1_certified());
  EXPECT_TRUE(r.kkt2_certified());
}

TEST(Kkt2, Fig2SaddleNotSecondOrder) {
  const ProblemInstance p = builtin_fig2();
  const Vector x = v3(0.5, 0.25, 0.25);
  const double eps = 0.05;
  const KktReport r = check_kkt2(p, x, eps);
  const double oracle_min = oracle::jacobi_eigen(oracle::projected_scaled(p.hessian(x), p.A, x)).first[0];
  EXPECT_NEAR(*r.projected_min_eig, oracle_min, 1e-4);
  EXPECT_LT(*r.projected_min_eig, -std::sqrt(eps) - 1e-3);
  EXPECT_TRUE(r.kkt1_certified());
  EXPECT_FALSE(r.kkt2_certified());
}

TEST(Kkt2, ConvexInstanceHasNonnegativeCurvature) {
  ProblemInstance p = gen_quartic(10, 4, 1.0, 22);
  p.objective.Q = Matrix::Identity(10, 10);
  std::mt19937_64 rng(62);
  for (int k = 0; k < 10; ++k) {
    const Vector x = oracle::random_positive(10, rng);
    const KktReport r = check_kkt2(p, x, 0.1);
    const double oracle_min = oracle::jacobi_eigen(oracle::projected_scaled(p.hessian(x), p.A, x)).first[0];
    EXPECT_GE(oracle_min, 0.0);
    EXPECT_GE(*r.projected_min_eig, -1e-6);
    EXPECT_NEAR(*r.projected_min_eig, oracle_min, 1e-5 * std::max(1.0, std::abs(oracle_min)));
  }
}

TEST(Kkt2, SquareSystemHasTrivialKernel) {
  ProblemInstance p = linear_pair(1.0, 1.0);
  p.A = Matrix::Identity(2, 2);
  p.b = p.x0;
  const KktReport r = check_kkt2(p, p.x0, 0.1);
  EXPECT_EQ(*r.projected_min_eig, 0.0);
}
