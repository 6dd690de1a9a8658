#include "iptr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "iptr/errors.hpp"

namespace iptr {

namespace {

// Cholesky pivot is declared collapsed below this fraction of its diagonal entry.
constexpr double kPivotTol = 1e-13;

void check_dims(const Matrix& A, const Vector& x, const Vector& g) {
  if (x.size() != A.cols() || g.size() != A.cols()) {
    throw DomainError("dimension mismatch: A is " + std::to_string(A.rows()) + "x" +
                      std::to_string(A.cols()) + ", x has " + std::to_string(x.size()) +
                      ", g has " + std::to_string(g.size()));
  }
}

void check_positive(const Vector& x, const char* what) {
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(x[i])) {
      throw DomainError(std::string(what) + " must be strictly positive (entry " +
                        std::to_string(i) + ")");
    }
  }
}

Matrix inverse_from_llt(const Eigen::LLT<Matrix>& llt, Index m) {
  Matrix kinv = llt.solve(Matrix::Identity(m, m));
  kinv = 0.5 * (kinv + kinv.transpose()).eval();
  return kinv;
}

}  // namespace

Matrix weighted_gram(const Matrix& A, const Vector& s) {
  const Index m = A.rows();
  Matrix B = A * s.cwiseSqrt().asDiagonal();
  Matrix K = Matrix::Zero(m, m);
  K.selfadjointView<Eigen::Lower>().rankUpdate(B);
  K.triangularView<Eigen::StrictlyUpper>() = K.transpose();
  return K;
}

Eigen::LLT<Matrix> factor_weighted_gram(const Matrix& A, const Vector& s) {
  Matrix K = weighted_gram(A, s);
  Eigen::LLT<Matrix> llt(K);
  const Matrix& L = llt.matrixLLT();
  for (Index j = 0; j < K.rows(); ++j) {
    const double piv = L(j, j) * L(j, j);
    if (!(K(j, j) > 0.0) || !(L(j, j) > 0.0) || !std::isfinite(piv) ||
        !(piv > kPivotTol * K(j, j))) {
      throw SingularMatrixError("A X^2 A^T is singular at pivot " + std::to_string(j), j);
    }
  }
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("A X^2 A^T is not positive definite", K.rows() - 1);
  }
  return llt;
}

Vector project_exact(const Matrix& A, const Vector& x, const Eigen::LLT<Matrix>& K,
                     const Vector& g) {
  check_dims(A, x, g);
  Vector h = x.cwiseProduct(g);
  Vector u = A * x.cwiseProduct(h);
  Vector w = K.solve(u);
  return h - x.cwiseProduct(A.transpose() * w);
}

Vector project_exact(const Matrix& A, const Vector& x, const Vector& g) {
  check_dims(A, x, g);
  check_positive(x, "x");
  return project_exact(A, x, factor_weighted_gram(A, x.cwiseAbs2()), g);
}

InverseCache InverseCache::build(const Matrix& A, const Vector& xbar, double tolerance) {
  check_positive(xbar, "xbar");
  InverseCache cache;
  cache.xbar_sq_diag = xbar.cwiseAbs2();
  cache.kinv = inverse_from_llt(factor_weighted_gram(A, cache.xbar_sq_diag), A.rows());
  cache.tolerance = tolerance;
  cache.last_update = UpdateKind::kRebuild;
  cache.rebuilds = 1;
  return cache;
}

double InverseCache::consistency_residual(const Matrix& A) const {
  Matrix K = weighted_gram(A, xbar_sq_diag);
  return (K * kinv - Matrix::Identity(K.rows(), K.cols())).norm();
}

double InverseCache::probe_residual(const Matrix& A, int probes, uint64_t seed) const {
  const Index m = A.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double sum = 0.0;
  for (int k = 0; k < probes; ++k) {
    Vector z(m);
    for (Index i = 0; i < m; ++i) z[i] = normal(rng);
    Vector y = kinv * z;
    Vector Ky = A * xbar_sq_diag.cwiseProduct(A.transpose() * y);
    sum += (Ky - z).squaredNorm();
  }
  return std::sqrt(sum / probes);
}

Vector apply_approx_projector(const Matrix& A, const Vector& x, const InverseCache& cache,
                              const Vector& g) {
  check_dims(A, x, g);
  if (cache.xbar_sq_diag.size() != x.size() || cache.kinv.rows() != A.rows()) {
    throw DomainError("inverse cache does not match the problem dimensions");
  }
  Vector h = x.cwiseProduct(g);
  Vector w = cache.kinv * (A * x.cwiseProduct(h));
  Vector r = h - cache.xbar_sq_diag.cwiseQuotient(x).cwiseProduct(A.transpose() * w);
  if (!r.allFinite()) {
    throw NumericalError("approximate projector produced non-finite values; cache corrupted");
  }
  return r;
}

InverseCache woodbury_update(InverseCache cache, const Matrix& A, std::span<const Index> changed,
                             std::span<const double> new_xbar) {
  if (changed.size() != new_xbar.size()) {
    throw DomainError("changed index count differs from new value count");
  }
  const Index m = A.rows();
  const Index q = static_cast<Index>(changed.size());
  if (q == 0) {
    cache.last_update = UpdateKind::kNone;
    return cache;
  }

  std::vector<Index> idx;
  std::vector<double> cdiag;
  idx.reserve(changed.size());
  for (Index k = 0; k < q; ++k) {
    const Index i = changed[k];
    const double v = new_xbar[k];
    if (i < 0 || i >= A.cols()) throw DomainError("changed index out of range");
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("new xbar values must be positive");
    const double c = v * v - cache.xbar_sq_diag[i];
    cache.xbar_sq_diag[i] = v * v;
    if (c != 0.0) {
      idx.push_back(i);
      cdiag.push_back(c);
    }
  }

  auto rebuild = [&] {
    cache.kinv = inverse_from_llt(factor_weighted_gram(A, cache.xbar_sq_diag), m);
    cache.updates_since_rebuild = 0;
    cache.last_update = UpdateKind::kRebuild;
    ++cache.rebuilds;
    return cache;
  };

  if (idx.empty()) {
    cache.last_update = UpdateKind::kNone;
    return cache;
  }
  const Index r = static_cast<Index>(idx.size());
  if (r > m) return rebuild();

  Matrix AI(m, r);
  for (Index k = 0; k < r; ++k) AI.col(k) = A.col(idx[k]);
  Matrix W = cache.kinv * AI;
  Matrix S = AI.transpose() * W;
  for (Index k = 0; k < r; ++k) S(k, k) += 1.0 / cdiag[k];
  Eigen::PartialPivLU<Matrix> lu(S);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    throw DegenerateUpdateError("Woodbury capacitance matrix is singular (rcond " +
                                std::to_string(rc) + ")");
  }
  cache.kinv.noalias() -= W * lu.solve(W.transpose());
  cache.kinv = 0.5 * (cache.kinv + cache.kinv.transpose()).eval();
  if (!cache.kinv.allFinite()) return rebuild();
  ++cache.updates_since_rebuild;
  cache.last_update = UpdateKind::kWoodbury;

  if (cache.updates_since_rebuild >= kRebuildEvery) return rebuild();
  if (cache.updates_since_rebuild % kProbeEvery == 0) {
    const uint64_t seed = static_cast<uint64_t>(cache.rebuilds) * 1000003ULL +
                          static_cast<uint64_t>(cache.updates_since_rebuild);
    if (!(cache.probe_residual(A, 2, seed) <= cache.tolerance)) return rebuild();
  }
  return cache;
}

Vector multiplier_leastsquares(const Matrix& A, const Vector& x, const Vector& w) {
  check_dims(A, x, w);
  check_positive(x, "x");
  auto K = factor_weighted_gram(A, x.cwiseAbs2());
  return -K.solve(A * x.cwiseProduct(w));
}

Vector multiplier_leastsquares(const Matrix& A, const Vector& x, const Vector& w,
                               const InverseCache& cache) {
  check_dims(A, x, w);
  return -(cache.kinv * (A * x.cwiseProduct(w)));
}

void require_full_row_rank(const Matrix& A) {
  if (A.rows() > A.cols()) {
    throw RankDeficientError("A has more rows than columns", A.cols());
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
  if (qr.rank() < A.rows()) {
    throw RankDeficientError("A is rank deficient: estimated rank " + std::to_string(qr.rank()) +
                                 " < " + std::to_string(A.rows()),
                             qr.rank());
  }
}

Matrix nullspace_basis(const Matrix& A, const Vector& x) {
  if (x.size() != A.cols()) throw DomainError("dimension mismatch in nullspace_basis");
  check_positive(x, "x");
  const Index m = A.rows();
  const Index n = A.cols();
  Matrix Bt = (A * x.asDiagonal()).transpose();
  Eigen::ColPivHouseholderQR<Matrix> qr(Bt);
  if (qr.rank() < m) {
    throw RankDeficientError("A X is rank deficient: estimated rank " +
                                 std::to_string(qr.rank()) + " < " + std::to_string(m),
                             qr.rank());
  }
  Matrix Q = qr.householderQ();
  return Q.rightCols(n - m);
}

std::pair<double, Vector> symmetric_min_eig(const Matrix& H) {
  if (H.rows() != H.cols() || H.rows() == 0) throw DomainError("matrix must be square");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw DomainError("matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
  Vector v = es.eigenvectors().col(0);
  return {es.eigenvalues()[0], v.normalized()};
}

}  // namespace iptr
