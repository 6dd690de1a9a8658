#include "iptr/lazy_tracker.hpp"

#include <cmath>
#include <string>

#include "iptr/errors.hpp"

namespace iptr {

namespace {

Vector checked_log(const Vector& x) {
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(x[i])) {
      throw DomainError("tracked vector must be strictly positive (entry " + std::to_string(i) +
                        ")");
    }
  }
  return x.array().log().matrix();
}

int ceil_log2(Index n) {
  int l = 0;
  while ((Index{1} << l) < n) ++l;
  return l;
}

}  // namespace

LazyTracker::LazyTracker(const Vector& x0, double delta) : delta_{delta} {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw DomainError("lazy tolerance delta must lie in (0, 1/2), got " + std::to_string(delta));
  }
  if (x0.size() == 0) throw DomainError("tracked vector is empty");
  ln_xbar_ = checked_log(x0);
  max_level_ = ceil_log2(x0.size());
  log2n_ = std::max(1, max_level_);
  checkpoints_.assign(max_level_ + 1, ln_xbar_);
}

RefreshSet LazyTracker::advance(const Vector& x_new) {
  if (x_new.size() != ln_xbar_.size()) throw DomainError("tracked vector changed dimension");
  Vector ln_new = checked_log(x_new);
  ++t_;

  const Index n = ln_new.size();
  std::vector<char> refresh(n, 0);
  RefreshSet out;
  for (int l = 0; l <= max_level_; ++l) {
    if (t_ % (long{1} << l) != 0) break;
    out.level = l;
    const double thresh = delta_ / (2.0 * (l + 1) * log2n_);
    Vector& cp = checkpoints_[l];
    for (Index i = 0; i < n; ++i) {
      if (std::abs(ln_new[i] - cp[i]) > thresh) refresh[i] = 1;
    }
    cp = ln_new;
  }
  for (Index i = 0; i < n; ++i) {
    if (std::abs(ln_xbar_[i] - ln_new[i]) > delta_) refresh[i] = 1;
  }
  for (Index i = 0; i < n; ++i) {
    if (refresh[i]) {
      ln_xbar_[i] = ln_new[i];
      out.indices.push_back(i);
    }
  }
  return out;
}

}  // namespace iptr
