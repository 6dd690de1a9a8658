#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iptr/negcurve.hpp"
#include "iptr/solver_first.hpp"

namespace iptr {

/**
 * First-order trust-region steps interleaved with negative-curvature escapes.
 *
 * Exact mode uses β = ε/(l+2ε) and the test Δφ > −ε²/(4l+4ε); approximate mode reuses the
 * general first-order parameters. base.shape must be kGeneral.
 */
struct SecondOrderConfig {
  SolverConfig base;
  /// Overrides the curvature-finder parameters derived from delta_total.
  std::optional<NcfParams> ncf;
  /// Total failure probability δ; each finder call gets δ·9√ε³/(1024(f(x₀)−f_lb)ρ²).
  double delta_total = 0.05;
};

enum class SecondOrderStatus { kKkt2Certified, kBudgetExhausted, kNcfFailed };

std::string to_string(SecondOrderStatus s);

struct SecondOrderOutcome {
  SecondOrderStatus status = SecondOrderStatus::kBudgetExhausted;
  Vector x_final;
  IterTrace trace;
  long ncf_invocations = 0;
  long ncf_successes = 0;
  /// First-order steps plus curvature steps taken.
  long iters = 0;
  std::optional<KktReport> report;
  ResolvedParams params;
  NcfParams ncf;
  /// f decrease of every accepted curvature step.
  std::vector<double> curvature_decreases;
  /// 9√ε³/(1024ρ²)
  double required_decrease = 0.0;
  /// Upper bound ⌈(f(x₀) − f_lb)·1024ρ²/(9√ε³)⌉ + 1 on finder calls.
  long ncf_budget = 0;
};

/**
 * True exactly when the last potential change in the window misses −threshold. Event rows
 * are ignored.
 */
bool ncf_trigger_policy(std::span<const TraceRow> window, double threshold);

/**
 * @throws DomainError for invalid configuration, propagated numerical errors otherwise.
 */
SecondOrderOutcome solve_second_order(const ProblemInstance& instance,
                                      const SecondOrderConfig& config);

}  // namespace iptr
