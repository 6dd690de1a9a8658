#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "iptr/errors.hpp"
#include "iptr/problems.hpp"
#include "oracle.hpp"

using namespace iptr;

namespace {

Vector v3(double a, double b, double c) {
  Vector x(3);
  x << a, b, c;
  return x;
}

// x0 plus a random kernel step, shortened to stay positive.
Vector random_interior(const ProblemInstance& p, std::mt19937_64& rng) {
  const Matrix Z = oracle::nullspace(p.A, Vector::Ones(p.n()));
  Vector d = Z * oracle::random_vector(Z.cols(), rng);
  double t = 1.0;
  for (Index i = 0; i < p.n(); ++i) {
    if (d[i] < 0.0) t = std::min(t, 0.9 * p.x0[i] / -d[i]);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return p.x0 + u(rng) * t * d;
}

// Stationary points of 40(a−½)² − 5u² + k·u⁴ on the simplex, in the chart
// x = (a, (1−a+u)/2, (1−a−u)/2): a = ½, u ∈ {0, ±√(10/(4k))}.
Vector fig_point(double k, int branch) {
  const double u = branch == 0 ? 0.0 : branch * std::sqrt(10.0 / (4.0 * k));
  return v3(0.5, (0.5 + u) / 2.0, (0.5 - u) / 2.0);
}

double projected_grad_norm(const ProblemInstance& p, const Vector& x) {
  const Matrix Z = oracle::nullspace(p.A, Vector::Ones(p.n()));
  return (oracle::transpose(Z) * p.grad(x)).norm();
}

double projected_scaled_min_eig(const ProblemInstance& p, const Vector& x) {
  return oracle::jacobi_eigen(oracle::projected_scaled(p.hessian(x), p.A, x)).first[0];
}

void expect_gradient_consistent(const ProblemInstance& p, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 50; ++k) {
    const Vector x = random_interior(p, rng);
    const Vector fd = oracle::fd_gradient([&](const Vector& y) { return p.eval(y); }, x);
    const Vector g = p.grad(x);
    EXPECT_LE((fd - g).norm(), 1e-5 * std::max(1.0, g.norm())) << p.name << " point " << k;
    Vector g2;
    EXPECT_EQ(p.eval_grad(x, g2), p.eval(x));
    EXPECT_LE((g2 - g).norm(), 1e-12 * std::max(1.0, g.norm()));
  }
}

}  // namespace

TEST(Builtins, Fig1Values) {
  const ProblemInstance p = builtin_fig1();
  EXPECT_EQ(p.n(), 3);
  EXPECT_EQ(p.m(), 1);
  const Vector c = Vector::Constant(3, 1.0 / 3.0);
  EXPECT_NEAR(p.eval(c), 40.0 / 36.0, 1e-14);
  EXPECT_LE(p.grad(v3(0.5, 0.25, 0.25)).norm(), 1e-15);
  EXPECT_NEAR((p.A * c)[0], p.b[0], 1e-15);
  EXPECT_NO_THROW(p.validate());
}

TEST(Builtins, Fig2StationaryPoints) {
  const ProblemInstance p = builtin_fig2();
  const Vector saddle = fig_point(40.0, 0);
  EXPECT_NEAR(p.eval(saddle), 0.0, 1e-15);
  EXPECT_LT(projected_scaled_min_eig(p, saddle), 0.0);
  for (int branch : {-1, 1}) {
    const Vector xm = fig_point(40.0, branch);
    EXPECT_NEAR(xm[1], branch > 0 ? 0.375 : 0.125, 1e-15);
    EXPECT_LE(projected_grad_norm(p, xm), 1e-13);
    EXPECT_GT(projected_scaled_min_eig(p, xm), 0.0);
  }
  // The point with u² = 1/8 is stationary only for a quartic coefficient of 20.
  EXPECT_GT(projected_grad_norm(p, v3(0.5, 0.426777, 0.073223)), 1.0);
}

TEST(Builtins, Fig1MinimaLeaveTheSimplex) {
  // u = ±√(10/16) > 1/2 violates x ≥ 0 at a = ½.
  const Vector xm = fig_point(4.0, 1);
  EXPECT_LT(xm[2], 0.0);
}

TEST(Oracle, GradientsMatchFiniteDifferences) {
  expect_gradient_consistent(builtin_fig1(), 41);
  expect_gradient_consistent(builtin_fig2(), 42);
  expect_gradient_consistent(gen_quartic(20, 8, 1.0, 3), 43);
  expect_gradient_consistent(gen_concave(20, 8, 3), 44);
}

TEST(Oracle, HessianMatchesFiniteDifferences) {
  std::mt19937_64 rng(45);
  for (const ProblemInstance& p : {builtin_fig2(), gen_quartic(12, 5, 1.0, 4)}) {
    for (int k = 0; k < 10; ++k) {
      const Vector x = random_interior(p, rng);
      double asym = 0.0;
      const Matrix H = fd_hessian(p, x, &asym);
      const Matrix Ha = p.hessian(x);
      EXPECT_LE((H - Ha).norm(), 1e-5 * std::max(1.0, Ha.norm()));
      EXPECT_LE(asym, 1e-6);
      const Vector v = oracle::random_vector(p.n(), rng);
      EXPECT_LE((fd_hessian_vector(p, x, v) - Ha * v).norm(), 1e-5 * std::max(1.0, (Ha * v).norm()));
    }
  }
}

TEST(GenQuartic, PlantedSaddle) {
  for (uint64_t seed : {1, 2, 3}) {
    const ProblemInstance p = gen_quartic(24, 10, 1.0, seed);
    EXPECT_NO_THROW(p.validate());
    EXPECT_LE(p.grad(p.x0).norm(), 1e-10 * std::max(1.0, p.objective.c.norm()));
    for (Index j = 0; j < p.n(); ++j) EXPECT_DOUBLE_EQ(p.A(0, j), 1.0 / std::sqrt(24.0));
    EXPECT_GE(p.x0.minCoeff(), 0.5);
    EXPECT_LE(p.x0.maxCoeff(), 1.5);
    EXPECT_LE(projected_scaled_min_eig(p, p.x0), -1.0 + 1e-9);
    const Matrix Z = oracle::nullspace(p.A, Vector::Ones(p.n()));
    const Matrix ZQZ = oracle::matmul(oracle::transpose(Z), oracle::matmul(p.objective.Q, Z));
    EXPECT_LT(oracle::jacobi_eigen(ZQZ).first[0], 0.0);
    ASSERT_TRUE(p.f_lower_bound.has_value());
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 50; ++k) EXPECT_GE(p.eval(random_interior(p, rng)), *p.f_lower_bound);
  }
}

TEST(GenQuartic, Deterministic) {
  const ProblemInstance a = gen_quartic(16, 6, 0.5, 9);
  const ProblemInstance b = gen_quartic(16, 6, 0.5, 9);
  EXPECT_EQ(a.A, b.A);
  EXPECT_EQ(a.objective.Q, b.objective.Q);
  EXPECT_EQ(a.objective.c, b.objective.c);
  EXPECT_EQ(a.x0, b.x0);
  EXPECT_EQ(a.constants.l, b.constants.l);
  const ProblemInstance c = materialize(*a.generator);
  EXPECT_EQ(a.objective.Q, c.objective.Q);
}

TEST(GenConcave, NegativeSemidefiniteAndConcave) {
  const ProblemInstance p = gen_concave(20, 8, 3);
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(p.objective.kind, ObjectiveKind::kConcaveQuadratic);
  EXPECT_NEAR(p.objective.c.norm(), 1.0, 1e-14);
  std::mt19937_64 rng(46);
  for (int k = 0; k < 100; ++k) {
    const Vector x = oracle::random_vector(20, rng);
    EXPECT_LE(x.dot(p.objective.Q * x), 1e-12 * x.squaredNorm());
  }
  for (int k = 0; k < 100; ++k) {
    const Vector x = random_interior(p, rng);
    const Vector y = random_interior(p, rng);
    EXPECT_GE(p.eval(0.5 * (x + y)), 0.5 * (p.eval(x) + p.eval(y)) - 1e-12);
  }
  const ProblemInstance q = gen_concave(20, 8, 3);
  EXPECT_EQ(p.objective.Q, q.objective.Q);
}

TEST(EstimateConstants, Fig2WithinFactorTwoOfGridMaximum) {
  // Grid over the open simplex of the restricted norm of X∇²fX, evaluated analytically.
  const ProblemInstance p = builtin_fig2();
  double sup = 0.0;
  const int N = 300;
  for (int i = 1; i < N; ++i) {
    for (int j = 1; i + j < N; ++j) {
      const Vector x = v3(double(i) / N, double(j) / N, double(N - i - j) / N);
      const Vector w = oracle::jacobi_eigen(oracle::projected_scaled(p.hessian(x), p.A, x)).first;
      sup = std::max({sup, std::abs(w[0]), std::abs(w[w.size() - 1])});
    }
  }
  EXPECT_GE(p.constants.l, sup);
  EXPECT_LE(p.constants.l, 2.0 * sup);
}

TEST(EstimateConstants, ZeroObjectiveAndMonotone) {
  ProblemInstance p = gen_quartic(10, 4, 1.0, 5);
  p.objective.sigma = 0.0;
  p.objective.Q.setZero();
  p.objective.c.setZero();
  const RegularityConstants k = estimate_constants(p, 20, 1);
  EXPECT_LE(k.l, 1e-6);
  EXPECT_LE(k.rho, 1e-6);

  const ProblemInstance q = gen_quartic(10, 4, 1.0, 5);
  const RegularityConstants a = estimate_constants(q, 10, 7);
  const RegularityConstants b = estimate_constants(q, 20, 7);
  EXPECT_LE(a.l, b.l);
  EXPECT_LE(a.rho, b.rho);
  EXPECT_LE(a.l_phi, b.l_phi);
  EXPECT_EQ(b.gamma, 1.0);
}

TEST(Validate, RejectsBadInstances) {
  ProblemInstance p = gen_quartic(8, 3, 1.0, 6);
  ProblemInstance bad = p;
  bad.x0[0] = -1.0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = p;
  bad.A.row(2) = bad.A.row(1);
  EXPECT_THROW(bad.validate(), RankDeficientError);
  bad = p;
  bad.objective.Q(0, 1) += 1.0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = p;
  bad.constants.gamma = 1.5;
  EXPECT_THROW(bad.validate(), DomainError);
  EXPECT_THROW(gen_quartic(4, 5, 1.0, 1), DomainError);
  EXPECT_THROW(p.eval(Vector::Ones(3)), DomainError);
}
