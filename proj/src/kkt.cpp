#include "iptr/kkt.hpp"

#include <cmath>

#include "iptr/barrier.hpp"
#include "iptr/errors.hpp"

namespace iptr {

namespace {

constexpr double kAsymmetryTol = 1e-4;

}  // namespace

KktReport check_kkt1(const ProblemInstance& instance, const Vector& x, double epsilon) {
  if (x.size() != instance.n()) throw DomainError("point dimension does not match the instance");
  if (!((x.array() > 0.0).all())) throw DomainError("KKT check requires an interior point");
  const Matrix& A = instance.A;
  const Vector g = instance.grad(x);
  const Vector w = scaled_potential_grad(x, g, epsilon);

  KktReport r;
  r.v = multiplier_leastsquares(A, x, w);
  const Vector dual = g + A.transpose() * r.v;
  r.stationarity_inf = x.cwiseProduct(dual).cwiseAbs().maxCoeff();
  r.dual_min = dual.minCoeff();
  r.feasibility_res = (A * x - instance.b).norm();
  r.min_coord = x.minCoeff();
  r.eps1 = 2.0 * epsilon;
  r.eps2 = std::sqrt(epsilon);
  r.feasibility_tol = 1e-8 * (1.0 + instance.b.norm());
  return r;
}

KktReport check_kkt2(const ProblemInstance& instance, const Vector& x, double epsilon) {
  KktReport r = check_kkt1(instance, x, epsilon);
  double asym = 0.0;
  const Matrix H = fd_hessian(instance, x, &asym);
  r.fd_asymmetry = asym;
  r.unreliable = asym > kAsymmetryTol;
  if (instance.m() == instance.n()) {
    r.projected_min_eig = 0.0;
    return r;
  }
  const Matrix Z = nullspace_basis(instance.A, x);
  Matrix M = Z.transpose() * x.asDiagonal() * H * x.asDiagonal() * Z;
  M = 0.5 * (M + M.transpose()).eval();
  r.projected_min_eig = symmetric_min_eig(M).first;
  return r;
}

}  // namespace iptr
