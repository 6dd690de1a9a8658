#include <gtest/gtest.h>

#include <cmath>

#include "iptr/errors.hpp"
#include "iptr/solver_second.hpp"

using namespace iptr;

namespace {

Vector v3(double a, double b, double c) {
  Vector x(3);
  x << a, b, c;
  return x;
}

TraceRow row(double dphi, const std::string& event = "step") {
  TraceRow r;
  r.potential_delta = dphi;
  r.event = event;
  return r;
}

SecondOrderConfig second(double eps, StepMode mode, uint64_t seed = 1) {
  SecondOrderConfig c;
  c.base.epsilon = eps;
  c.base.mode = mode;
  c.base.seed = seed;
  c.base.trace_every = 50;
  return c;
}

double distance_to_fig2_minima(const Vector& x) {
  return std::min((x - v3(0.5, 0.375, 0.125)).cwiseAbs().maxCoeff(),
                  (x - v3(0.5, 0.125, 0.375)).cwiseAbs().maxCoeff());
}

}  // namespace

TEST(NcfTrigger, ThresholdExamples) {
  const std::vector<TraceRow> big = {row(-1.01)};
  const std::vector<TraceRow> small = {row(-0.99)};
  const std::vector<TraceRow> flat = {row(0.0)};
  EXPECT_FALSE(ncf_trigger_policy(big, 1.0));
  EXPECT_TRUE(ncf_trigger_policy(small, 1.0));
  EXPECT_TRUE(ncf_trigger_policy(flat, 1.0));
}

TEST(NcfTrigger, UsesLastStepAndIgnoresEvents) {
  const std::vector<TraceRow> w = {row(0.0), row(-2.0), row(0.0, "ncf-found"), row(0.0, "curvature-step")};
  EXPECT_FALSE(ncf_trigger_policy(w, 1.0));
  const std::vector<TraceRow> t = {row(-2.0), row(-0.5, "terminal")};
  EXPECT_TRUE(ncf_trigger_policy(t, 1.0));
  EXPECT_THROW(ncf_trigger_policy(std::vector<TraceRow>{}, 1.0), DomainError);
  const std::vector<TraceRow> only_events = {row(0.0, "ncf-none")};
  EXPECT_THROW(ncf_trigger_policy(only_events, 1.0), DomainError);
}

TEST(SolveSecond, Fig2ExactReachesMinimum) {
  const ProblemInstance p = builtin_fig2();
  const SecondOrderOutcome o = solve_second_order(p, second(0.04, StepMode::kExact));
  EXPECT_EQ(o.status, SecondOrderStatus::kKkt2Certified);
  ASSERT_TRUE(o.report.has_value());
  EXPECT_TRUE(o.report->kkt2_certified());
  EXPECT_LE(distance_to_fig2_minima(o.x_final), 1e-2);
  EXPECT_GE(o.ncf_successes, 1);
  EXPECT_LE(o.ncf_invocations, o.ncf_budget);
  for (double dec : o.curvature_decreases) EXPECT_GE(dec, o.required_decrease);
  EXPECT_DOUBLE_EQ(o.required_decrease, curvature_decrease_bound(0.04, p.constants.rho));
  EXPECT_NEAR(o.params.beta, 0.04 / (p.constants.l + 0.08), 1e-15);
}

TEST(SolveSecond, Fig2ApproxReachesMinimum) {
  const ProblemInstance p = builtin_fig2();
  const SecondOrderOutcome o = solve_second_order(p, second(0.04, StepMode::kApprox));
  EXPECT_EQ(o.status, SecondOrderStatus::kKkt2Certified);
  EXPECT_LE(distance_to_fig2_minima(o.x_final), 2e-2);
  EXPECT_LE(o.ncf_invocations, o.ncf_budget);
}

TEST(SolveSecond, ConvexNeedsNoCurvatureSteps) {
  ProblemInstance p = gen_quartic(16, 6, 1.0, 4);
  p.objective.Q = Matrix::Identity(16, 16);
  p.constants = estimate_constants(p, 200, 1);
  const SecondOrderOutcome o = solve_second_order(p, second(0.1, StepMode::kExact));
  EXPECT_EQ(o.status, SecondOrderStatus::kKkt2Certified);
  EXPECT_EQ(o.ncf_successes, 0);
  EXPECT_EQ(o.ncf_invocations, 1);
  EXPECT_TRUE(o.curvature_decreases.empty());
}

TEST(SolveSecond, TraceRecordsEvents) {
  const ProblemInstance p = builtin_fig2();
  const SecondOrderOutcome o = solve_second_order(p, second(0.04, StepMode::kExact));
  long found = 0, steps = 0, none = 0;
  for (const TraceRow& r : o.trace) {
    if (r.event == "ncf-found") {
      ++found;
      ASSERT_TRUE(r.rayleigh.has_value());
      EXPECT_LE(*r.rayleigh, -0.2 / 4.0);
    }
    if (r.event == "curvature-step") ++steps;
    if (r.event == "ncf-none") ++none;
  }
  EXPECT_EQ(found, o.ncf_successes);
  EXPECT_EQ(steps, static_cast<long>(o.curvature_decreases.size()));
  EXPECT_EQ(found + none, o.ncf_invocations);
}

TEST(SolveSecond, RejectsConcaveShape) {
  SecondOrderConfig c = second(0.04, StepMode::kExact);
  c.base.shape = ObjectiveShape::kConcave;
  EXPECT_THROW(solve_second_order(builtin_fig2(), c), DomainError);
}
