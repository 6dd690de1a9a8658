#pragma once

#include <vector>

#include "iptr/linalg.hpp"

namespace iptr {

/// Coordinates of x̄ refreshed by one tracker advance.
struct RefreshSet {
  /// Sorted, unique.
  std::vector<Index> indices;
  /// Largest l ≤ ⌈log₂ n⌉ with t ≡ 0 mod 2^l.
  int level = 0;
};

/**
 * Lazy ln-scale approximation x̄ of a stream of positive vectors x₀, x₁, ….
 *
 * Level l fires every 2^l advances and refreshes the coordinates that drifted more than
 * δ/(2(l+1)⌈log₂ n⌉) since that level last fired. An ℓ∞ guard then refreshes any coordinate
 * with |ln x̄ᵢ − ln xᵢ| > δ, so ‖ln x̄ − ln x‖∞ ≤ δ after every advance.
 */
class LazyTracker {
 public:
  /**
   * @throws DomainError unless delta ∈ (0, 1/2) and x0 > 0.
   */
  LazyTracker(const Vector& x0, double delta);

  RefreshSet advance(const Vector& x_new);

  double delta() const { return delta_; }
  long t() const { return t_; }
  int max_level() const { return max_level_; }
  const Vector& ln_xbar() const { return ln_xbar_; }
  Vector xbar() const { return ln_xbar_.array().exp().matrix(); }

 private:
  double delta_;
  long t_ = 0;
  int max_level_;
  int log2n_;
  // checkpoints_[l] is ln x at the last time level l fired.
  std::vector<Vector> checkpoints_;
  Vector ln_xbar_;
};

inline LazyTracker tracker_init(const Vector& x0, double delta) { return LazyTracker(x0, delta); }

inline RefreshSet tracker_advance(LazyTracker& tracker, const Vector& x_new) {
  return tracker.advance(x_new);
}

}  // namespace iptr
