#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "iptr/linalg.hpp"

namespace iptr {

enum class ObjectiveKind { kFig1, kFig2, kQuartic, kConcaveQuadratic };

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& s);

/// Seed-and-recipe description of a generated instance.
struct GeneratorSpec {
  /// "quartic" or "concave".
  std::string kind;
  Index n = 0;
  Index m = 0;
  double sigma = 0.0;
  uint64_t seed = 0;
};

/**
 * f(x) = Σ σ/4·xᵢ⁴ + ½xᵀQx + cᵀx for quartic and concave-quadratic kinds; the built-in
 * kinds carry no parameters.
 */
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kQuartic;
  double sigma = 0.0;
  Matrix Q;
  Vector c;
};

/// Scaled Lipschitz constants l, ρ, L_φ and neighborhood radius γ.
struct RegularityConstants {
  double l = 1.0;
  double rho = 1.0;
  double l_phi = 1.0;
  double gamma = 1.0;
};

/**
 * min f(x) subject to A·x = b, x ≥ 0, plus a declared interior point.
 */
struct ProblemInstance {
  std::string name;
  Matrix A;
  Vector b;
  ObjectiveSpec objective;
  RegularityConstants constants;
  /// Strictly feasible point.
  Vector x0;
  /// Lower bound on f over the feasible set, when one is known.
  std::optional<double> f_lower_bound;
  std::optional<GeneratorSpec> generator;

  Index n() const { return A.cols(); }
  Index m() const { return A.rows(); }

  double eval(const Vector& x) const;
  Vector grad(const Vector& x) const;
  /// f(x) with ∇f(x) written to g, sharing the Q·x product.
  double eval_grad(const Vector& x, Vector& g) const;
  /// Analytic Hessian, used only by tests and oracles.
  Matrix hessian(const Vector& x) const;

  /// Checks dimensions, rank, symmetry of Q, constants, and interior feasibility of x0.
  void validate() const;
};

ProblemInstance builtin_fig1();
ProblemInstance builtin_fig2();

/**
 * Random quartic with a planted stationary point x₀ that is a saddle on ker(A).
 *
 * @throws RankDeficientError if A stays rank deficient after the retry budget.
 */
ProblemInstance gen_quartic(Index n, Index m, double sigma, uint64_t seed);

/// Concave quadratic: σ = 0, Q = −GᵀG/n, c a random unit vector.
ProblemInstance gen_concave(Index n, Index m, uint64_t seed);

/// Regenerates an instance from its recipe.
ProblemInstance materialize(const GeneratorSpec& spec);

/**
 * Sampled estimates of l, ρ, L_φ with a 1.5× safety factor, γ = 1.
 *
 * Interior points come from a hit-and-run walk over {Ax = b, x > 0}. l and ρ use the scaled
 * Hessian X∇²fX restricted to ker(AX) with finite-difference Hessians. L_φ bounds
 * ‖X∇f − εe‖ for every ε ∈ [0, 1].
 */
RegularityConstants estimate_constants(const ProblemInstance& instance, int samples,
                                       uint64_t seed);

/**
 * Central finite-difference Hessian of the instance gradient, symmetrized.
 * Step per coordinate is cbrt(eps)·max(1, |xᵢ|).
 *
 * @param asymmetry receives max|H − Hᵀ| / max(1, max|H|) before symmetrization.
 */
Matrix fd_hessian(const ProblemInstance& instance, const Vector& x, double* asymmetry = nullptr);

/// Hessian-vector product by central differences of the gradient.
Vector fd_hessian_vector(const ProblemInstance& instance, const Vector& x, const Vector& v);

}  // namespace iptr
