#pragma once

#include <optional>

#include "iptr/linalg.hpp"
#include "iptr/problems.hpp"

namespace iptr {

/**
 * Measured KKT residuals at a candidate point. Certification flags are derived from the
 * measurements on demand.
 */
struct KktReport {
  Vector v;
  /// ‖X(∇f + Aᵀv)‖∞
  double stationarity_inf = 0.0;
  /// minᵢ (∇f + Aᵀv)ᵢ
  double dual_min = 0.0;
  /// ‖Ax − b‖₂
  double feasibility_res = 0.0;
  double min_coord = 0.0;
  /// λ_min(Zᵀ X∇²f X Z), absent for first-order checks.
  std::optional<double> projected_min_eig;
  /// Relative asymmetry of the finite-difference Hessian.
  std::optional<double> fd_asymmetry;
  bool unreliable = false;
  /// (ε₁, ε₂) = (2ε, √ε)
  double eps1 = 0.0;
  double eps2 = 0.0;
  /// 1e-8·(1 + ‖b‖)
  double feasibility_tol = 0.0;

  bool feasible() const { return feasibility_res <= feasibility_tol && min_coord > 0.0; }
  bool kkt1_certified() const {
    return feasible() && stationarity_inf <= eps1 && dual_min >= -eps1;
  }
  /// Second-order slack 1e-3 absorbs finite-difference error.
  bool kkt2_certified() const {
    return kkt1_certified() && projected_min_eig && *projected_min_eig >= -eps2 - 1e-3;
  }
};

/**
 * 2ε-KKT check with v from the least-squares multiplier on w = X∇f − ε·e.
 *
 * @throws DomainError if x has a non-positive coordinate.
 */
KktReport check_kkt1(const ProblemInstance& instance, const Vector& x, double epsilon);

/**
 * (2ε, √ε)-KKT2 check: check_kkt1 plus the minimum eigenvalue of the projected scaled
 * finite-difference Hessian.
 */
KktReport check_kkt2(const ProblemInstance& instance, const Vector& x, double epsilon);

}  // namespace iptr
