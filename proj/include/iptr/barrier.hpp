#pragma once

#include "iptr/linalg.hpp"
#include "iptr/problems.hpp"

namespace iptr {

/// φ(x) = f(x) − ε·Σ ln xᵢ over a fixed instance.
struct PotentialContext {
  /**
   * @throws DomainError unless 0 < epsilon ≤ min{γ, 1}.
   */
  PotentialContext(const ProblemInstance& instance, double epsilon);

  const ProblemInstance* instance;
  double epsilon;
};

/**
 * @throws DomainError on a non-positive coordinate.
 */
double potential_eval(const PotentialContext& ctx, const Vector& x);

/// ∇φ = ∇f − ε·x⁻¹.
Vector potential_grad(const PotentialContext& ctx, const Vector& x);

/// X∇φ = X∇f − ε·e given a precomputed gradient.
Vector scaled_potential_grad(const Vector& x, const Vector& grad_f, double epsilon);

/**
 * Evaluates −Σ ln(1 + dᵢ) ≤ −eᵀd + β²/(2(1−β)), the barrier change x → X(e + d).
 * Returns false when ‖d‖ ≤ β < 1 does not hold.
 */
bool barrier_step_bound_check(const Vector& x, const Vector& d, double beta);

struct CenterResult {
  Vector x0;
  /// −Σ ln x ≥ −Σ ln x0 − c0 on the interior.
  double c0 = 0.0;
  double decrement = 0.0;
  int iterations = 0;
};

/**
 * Damped Newton on −Σ ln x subject to A·x = b with damping 1/(1 + λ).
 *
 * c0 is n·(−λ − ln(1 − λ)), from the self-concordance suboptimality bound at decrement λ.
 *
 * @throws DomainError if x_start is not strictly feasible.
 * @throws NumericalError if a step cannot be made acceptable within 100 halvings or the
 *   iteration cap is hit.
 */
CenterResult analytic_center(const Matrix& A, const Vector& b, const Vector& x_start,
                             double tol = 1e-10);

}  // namespace iptr
