#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace iptr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/**
 * Forms K = A·diag(s)·Aᵀ (lower triangle filled, then mirrored).
 */
Matrix weighted_gram(const Matrix& A, const Vector& s);

/**
 * Cholesky factorization of A·diag(s)·Aᵀ.
 *
 * @throws SingularMatrixError naming the first pivot that collapses.
 */
Eigen::LLT<Matrix> factor_weighted_gram(const Matrix& A, const Vector& s);

/**
 * Returns P·X·g where P = I − X·Aᵀ(A·X²·Aᵀ)⁻¹·A·X is the orthogonal projector
 * onto ker(A·X).
 */
Vector project_exact(const Matrix& A, const Vector& x, const Vector& g);

/// Same as above with a precomputed factorization of A·X²·Aᵀ.
Vector project_exact(const Matrix& A, const Vector& x, const Eigen::LLT<Matrix>& K,
                     const Vector& g);

enum class UpdateKind { kNone, kWoodbury, kRebuild };

/**
 * Explicit inverse of K̄ = A·X̄²·Aᵀ for a lazily tracked diagonal X̄.
 */
struct InverseCache {
  /// (A·X̄²·Aᵀ)⁻¹, m×m, kept symmetric.
  Matrix kinv;
  /// Diagonal of X̄².
  Vector xbar_sq_diag;
  /// Rebuild trigger on the consistency residual ‖K·K⁻¹ − I‖_F.
  double tolerance = 1e-6;
  /// Woodbury updates applied since the last direct rebuild.
  int updates_since_rebuild = 0;
  UpdateKind last_update = UpdateKind::kNone;
  /// Total direct rebuilds over the cache lifetime.
  int64_t rebuilds = 0;

  /// Forms and inverts A·diag(xbar²)·Aᵀ directly.
  static InverseCache build(const Matrix& A, const Vector& xbar, double tolerance = 1e-6);

  /// Dense ‖K·K⁻¹ − I‖_F, O(m²n).
  double consistency_residual(const Matrix& A) const;

  /// Stochastic estimate of ‖K·K⁻¹ − I‖_F from Gaussian probes, O(probes·mn).
  double probe_residual(const Matrix& A, int probes, uint64_t seed) const;
};

/// The Woodbury path refreshes from scratch after this many updates.
inline constexpr int kRebuildEvery = 4096;
/// Probe residual is sampled every this many Woodbury updates.
inline constexpr int kProbeEvery = 8;

/**
 * Returns R·X·g where R = I − X⁻¹·X̄²·Aᵀ(A·X̄²·Aᵀ)⁻¹·A·X. A·X·R = 0 holds for any X̄.
 *
 * @throws NumericalError on a non-finite result.
 */
Vector apply_approx_projector(const Matrix& A, const Vector& x, const InverseCache& cache,
                              const Vector& g);

/**
 * Updates the cached inverse after X̄ changes on `changed` to `new_xbar`.
 *
 * Uses K⁺⁻¹ = K⁻¹ − K⁻¹A_I(C⁻¹ + A_IᵀK⁻¹A_I)⁻¹A_IᵀK⁻¹ with C = diag(x̄²_new − x̄²_old)
 * when q ≤ m. Falls back to a direct rebuild when q > m, every kRebuildEvery updates, or
 * when the probe residual exceeds the cache tolerance.
 *
 * @throws DegenerateUpdateError when the capacitance matrix is numerically singular.
 */
InverseCache woodbury_update(InverseCache cache, const Matrix& A, std::span<const Index> changed,
                             std::span<const double> new_xbar);

/**
 * v minimizing ‖w + X·Aᵀ·v‖₂.
 */
Vector multiplier_leastsquares(const Matrix& A, const Vector& x, const Vector& w);

/**
 * Multiplier from the cached inverse, v = −K̄⁻¹·A·X·w. Equals the exact minimizer when X̄ = X.
 */
Vector multiplier_leastsquares(const Matrix& A, const Vector& x, const Vector& w,
                               const InverseCache& cache);

/**
 * Orthonormal basis of ker(A·X), n×(n−m).
 *
 * @throws RankDeficientError with the estimated rank.
 */
Matrix nullspace_basis(const Matrix& A, const Vector& x);

/**
 * Smallest eigenpair of a symmetric matrix.
 *
 * @throws DomainError if H is not symmetric to 1e-8 relative.
 */
std::pair<double, Vector> symmetric_min_eig(const Matrix& H);

/**
 * Throws RankDeficientError unless A (m×n, m ≤ n) has full row rank.
 */
void require_full_row_rank(const Matrix& A);

}  // namespace iptr
