#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iptr/barrier.hpp"
#include "iptr/kkt.hpp"
#include "iptr/lazy_tracker.hpp"
#include "iptr/linalg.hpp"
#include "iptr/problems.hpp"
#include "iptr/trace.hpp"

namespace iptr {

enum class StepMode { kExact, kApprox };
enum class ObjectiveShape { kGeneral, kConcave };

/**
 * Parameters of a first-order solve. Unset optionals take the formula defaults:
 *
 * - exact, general: β = ε/(l+2ε), stop when Δφ > −ε²/(4l+4ε)
 * - approx, general: β = ε/(l+2ε+2), δ = min(ε/(15L_φ), β/(92L_φ)), stop when
 *   Δφ > −ε²/(2l+4ε+4)
 * - exact, concave: β = 1/2, stop when Δφ > −εβ(1−β)
 * - approx, concave: β = 1/2, δ = (1−β)ε/(184L_φ), stop when Δφ > −½εβ(1−β)
 */
struct SolverConfig {
  double epsilon = 0.1;
  std::optional<double> beta;
  /// 0 forces x̄ = x every iteration.
  std::optional<double> delta;
  StepMode mode = StepMode::kExact;
  ObjectiveShape shape = ObjectiveShape::kGeneral;
  /// Unset: iteration budget T from the potential-decrease bound.
  std::optional<long> max_iters;
  /// When false the loop runs max_iters steps regardless of the potential test.
  bool stop_rule = true;
  /// Run the KKT checker on the returned point.
  bool certify = true;
  uint64_t seed = 0;
  int trace_every = 1;
  /// Overrides the instance lower bound used in T.
  std::optional<double> f_lower_bound;
  /// Start point; default is the analytic center computed from the instance x0.
  std::optional<Vector> x_start;
  /// Opt-in β_t = max(β, ‖RX∇φ‖/(l+2ε+2)) capped at 1/4. Not covered by the guarantees.
  bool adaptive_beta = false;
  /// Record the first-order stationarity residual on trace rows.
  bool trace_kkt1 = false;
};

/// SolverConfig with every formula default evaluated.
struct ResolvedParams {
  double epsilon = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  /// Positive; a step is accepted when φ drops by more than this.
  double threshold = 0.0;
  long budget = 0;
  bool budget_from_formula = true;
  double c0 = 0.0;
  double f_lower_bound = 0.0;
  Vector x_start;
};

/**
 * Evaluates the formula defaults and the start point.
 *
 * @throws DomainError for out-of-range parameters, including ε > min{γ, ½} in approximate
 *   modes, or a missing f lower bound when the budget needs one.
 */
ResolvedParams resolve_params(const ProblemInstance& instance, const SolverConfig& config);

std::string algo_name(StepMode mode, ObjectiveShape shape);

struct StepDiagnostics {
  /// ‖P X∇φ‖ or ‖R X∇φ‖.
  double proj_norm = 0.0;
  double xgphi_norm = 0.0;
  /// The projected gradient fell below 1e-12·(1 + ‖X∇φ‖).
  bool zero = false;
  /// Multiplier from the projector solve, v = −K⁻¹AXw.
  Vector v;
  /// The projected vector p, so that ‖X(∇f + Aᵀv)‖∞ = ‖p + εe‖∞ in exact mode.
  Vector projected;
  bool rebuilt = false;
};

struct ExactStep {
  Vector d;
  StepDiagnostics diag;
};

/**
 * d = −β·P X∇φ/‖P X∇φ‖, or 0 when the projected gradient vanishes.
 */
ExactStep step_exact_first(const ProblemInstance& instance, const PotentialContext& ctx,
                           const Vector& x, const Vector& grad_f, double beta);
ExactStep step_exact_first(const ProblemInstance& instance, const PotentialContext& ctx,
                           const Vector& x, double beta);

struct ApproxStep {
  Vector d;
  Vector x_next;
  RefreshSet refreshed;
  StepDiagnostics diag;
};

/**
 * d̃ = −β·R X∇φ/‖R X∇φ‖ (or 0), then x_next = X(e + d̃), the tracker advanced to x_next and
 * the cache updated on the refreshed coordinates. A null tracker means x̄ = x each step.
 *
 * A corrupted cache is rebuilt from the tracker state and the step retried once.
 */
ApproxStep step_approx_first(const ProblemInstance& instance, const PotentialContext& ctx,
                             const Vector& x, const Vector& grad_f, double beta,
                             LazyTracker* tracker, InverseCache& cache);

enum class SolveStatus { kKkt1Certified, kBudgetExhausted, kMaxIters, kStalled };

std::string to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::kMaxIters;
  Vector x_final;
  Vector v_final;
  long iters = 0;
  IterTrace trace;
  /// Per-iteration step time, one entry per completed iteration.
  std::vector<int64_t> iter_ns;
  std::optional<KktReport> report;
  ResolvedParams params;
  /// Potential decreases of all accepted steps.
  std::vector<double> decreases;
};

/**
 * Interior-point trust-region loop from the start point. Returns when the potential test
 * fails (the iterate before the failed step), when the projected gradient vanishes, or when
 * the budget runs out.
 *
 * @throws NumericalError if the interior or log-change invariants break.
 */
SolveOutcome solve_first_order(const ProblemInstance& instance, const SolverConfig& config);

/**
 * Shared iteration state for first-order and second-order loops.
 */
class FirstOrderEngine {
 public:
  FirstOrderEngine(const ProblemInstance& instance, const PotentialContext& ctx, StepMode mode,
                   double beta, double delta, bool adaptive_beta);

  /// Moves to x, rebuilding the tracker and cache.
  void reset(const Vector& x);

  struct Proposal {
    Vector x_next;
    double f_next = 0.0;
    Vector g_next;
    double phi_next = 0.0;
    double step_norm = 0.0;
    long q = 0;
    StepDiagnostics diag;
  };

  /// Computes a step from the current point without moving.
  Proposal propose();
  void accept(Proposal&& p);

  const Vector& x() const { return x_; }
  const Vector& grad() const { return g_; }
  double f() const { return f_; }
  double phi() const { return phi_; }

 private:
  const ProblemInstance* instance_;
  PotentialContext ctx_;
  StepMode mode_;
  double beta_;
  double delta_;
  bool adaptive_beta_;
  Vector x_;
  Vector g_;
  double f_ = 0.0;
  double phi_ = 0.0;
  std::optional<LazyTracker> tracker_;
  InverseCache cache_;
};

/// Throws NumericalError unless x > 0 and ‖Ax − b‖ ≤ 1e-8·(1 + ‖b‖).
void require_interior(const ProblemInstance& instance, const Vector& x);

}  // namespace iptr
