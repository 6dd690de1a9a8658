#pragma once

#include <cstdint>
#include <optional>

#include "iptr/linalg.hpp"
#include "iptr/problems.hpp"

namespace iptr {

struct NcfParams {
  /// Failure probability of one invocation.
  double delta0 = 0.05;
  /// Power iterations 𝒯.
  long calT = 0;
  /// Probe radius, in (0, 1).
  double r = 1e-8;
  /// dim ker(AX) = n − m.
  Index k = 0;
};

/// Smallest probe radius used when the formula underflows.
inline constexpr double kMinProbeRadius = 1e-8;

/**
 * 𝒯 = ⌈(8l/√ε)·log((8l/δ₀)·√(n/(πε)))⌉ and
 * r = ((1 + 7√ε/(8l))/2)^𝒯/(8ρ)·√(πε/k)·δ₀, floored at kMinProbeRadius and kept below 1.
 */
NcfParams ncf_params(const ProblemInstance& instance, double epsilon, double delta0);

struct CurvatureResult {
  bool found = false;
  /// Best candidate seen, unit and in ker(AX); set whenever k > 0.
  std::optional<Vector> e_hat;
  /// Finite-difference Rayleigh quotient of e_hat.
  double rayleigh = 0.0;
  long iterations = 0;
  double r_used = 0.0;
};

/**
 * Projected power iteration y ← y − (‖y‖/(l·r))·P X(∇f(X(e + r·y/‖y‖)) − ∇f(x)) from a
 * uniform start on the unit sphere of ker(AX). Every iterate is scored by
 * ⟨v, P X(∇f(X(e + τv)) − ∇f(x))⟩/τ with τ = min(r, 1e-4) and the most negative kept.
 *
 * found is set when the best score is at most −√ε/4.
 *
 * @throws OrthantExitError if a probe point leaves the positive orthant.
 */
CurvatureResult find_negative_curvature(const ProblemInstance& instance, const Vector& x,
                                        double epsilon, const NcfParams& params, uint64_t seed);

/// Halves r and retries on OrthantExitError, up to 5 times.
CurvatureResult find_negative_curvature_retry(const ProblemInstance& instance, const Vector& x,
                                              double epsilon, NcfParams params, uint64_t seed);

/// vᵀ X∇²f X v with the analytic Hessian, for verification.
double oracle_rayleigh(const ProblemInstance& instance, const Vector& x, const Vector& v);

/**
 * x − sign(⟨∇f(x), Xê⟩)·(3√ε/(8ρ))·Xê with sign(0) = +1.
 *
 * @throws OrthantExitError if the step length 3√ε/(8ρ) is not below 1.
 */
Vector curvature_descent_step(const ProblemInstance& instance, const Vector& x,
                              const Vector& e_hat, double epsilon, double rho);

/// 9√ε³/(1024ρ²)
double curvature_decrease_bound(double epsilon, double rho);

}  // namespace iptr
