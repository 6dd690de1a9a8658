#include "iptr/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "iptr/barrier.hpp"
#include "iptr/errors.hpp"

namespace iptr {

namespace {

constexpr int kRankRetries = 20;

double fig_quartic_coef(ObjectiveKind kind) { return kind == ObjectiveKind::kFig1 ? 4.0 : 40.0; }

bool is_builtin(ObjectiveKind kind) {
  return kind == ObjectiveKind::kFig1 || kind == ObjectiveKind::kFig2;
}

void require_dim(const ProblemInstance& p, const Vector& x) {
  if (x.size() != p.n()) throw DomainError("point dimension does not match the instance");
}

Matrix random_constraints(Index n, Index m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int attempt = 0; attempt < kRankRetries; ++attempt) {
    Matrix A(m, n);
    A.row(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    for (Index i = 1; i < m; ++i) {
      for (Index j = 0; j < n; ++j) A(i, j) = unif(rng);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
    if (qr.rank() == m) return A;
  }
  throw RankDeficientError("random constraint matrix stayed rank deficient", 0);
}

Vector uniform_interior(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = unif(rng);
  return x;
}

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix G(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  }
  return G;
}

// Projection onto ker(A) through the normal equations of A·Aᵀ.
Vector project_kernel(const Matrix& A, const Eigen::LLT<Matrix>& AAt, const Vector& z) {
  return z - A.transpose() * AAt.solve(A * z);
}

// Certified lower bound on f over {x ≥ 0, Σx = s}: ‖x‖₂ ≤ s, Σx⁴ ≥ ‖x‖⁴/n, xᵀQx ≥ −‖Q‖_F‖x‖².
double quartic_lower_bound(const ProblemInstance& p) {
  const double n = static_cast<double>(p.n());
  const double s = p.b[0] * std::sqrt(n);
  const double sigma = p.objective.sigma;
  const double lam = -p.objective.Q.norm();
  const double cn = p.objective.c.norm();
  auto g = [&](double r) { return sigma * r * r * r * r / (4.0 * n) + 0.5 * lam * r * r - cn * r; };
  const double lip = sigma * s * s * s / n + std::abs(lam) * s + cn;
  const int grid = 20000;
  const double h = s / grid;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= grid; ++k) best = std::min(best, g(k * h));
  return best - 0.5 * lip * h;
}

ProblemInstance make_fig(ObjectiveKind kind) {
  ProblemInstance p;
  p.name = (kind == ObjectiveKind::kFig1) ? "fig1" : "fig2";
  p.A = Matrix::Ones(1, 3);
  p.b = Vector::Ones(1);
  p.objective.kind = kind;
  p.x0 = Vector::Constant(3, 1.0 / 3.0);
  // 40(x₀−½)² ≥ 0 and min_u −5u² + k·u⁴ = −25/(4k).
  p.f_lower_bound = -25.0 / (4.0 * fig_quartic_coef(kind));
  return p;
}

// Largest |eigenvalue| of S restricted to the columns of Z.
double restricted_norm(const Matrix& S, const Matrix& Z) {
  Matrix M = Z.transpose() * S * Z;
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Power iteration for the largest |eigenvalue| of a symmetric operator on ker(AX).
template <typename Op>
double restricted_norm_power(const Matrix& A, const Vector& x, Op&& op, std::mt19937_64& rng) {
  const Index n = x.size();
  auto K = factor_weighted_gram(A, x.cwiseAbs2());
  auto proj = [&](const Vector& v) { return project_exact(A, x, K, v.cwiseQuotient(x)); };
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  v = proj(v).normalized();
  double est = 0.0;
  for (int k = 0; k < 40; ++k) {
    Vector w = proj(op(v));
    est = w.norm();
    if (!(est > 0.0)) return 0.0;
    v = w / est;
  }
  return est;
}

constexpr Index kDenseEstimateMax = 128;

}  // namespace

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kFig1:
      return "builtin-fig1";
    case ObjectiveKind::kFig2:
      return "builtin-fig2";
    case ObjectiveKind::kQuartic:
      return "quartic";
    case ObjectiveKind::kConcaveQuadratic:
      return "concave-quadratic";
  }
  return "unknown";
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
  if (s == "builtin-fig1") return ObjectiveKind::kFig1;
  if (s == "builtin-fig2") return ObjectiveKind::kFig2;
  if (s == "quartic") return ObjectiveKind::kQuartic;
  if (s == "concave-quadratic") return ObjectiveKind::kConcaveQuadratic;
  throw DomainError("unknown objective kind '" + s + "'");
}

double ProblemInstance::eval(const Vector& x) const {
  require_dim(*this, x);
  if (is_builtin(objective.kind)) {
    const double u = x[1] - x[2];
    const double a = x[0] - 0.5;
    return 40.0 * a * a - 5.0 * u * u + fig_quartic_coef(objective.kind) * u * u * u * u;
  }
  double v = 0.5 * x.dot(objective.Q * x) + objective.c.dot(x);
  if (objective.sigma != 0.0) v += 0.25 * objective.sigma * x.array().pow(4).sum();
  return v;
}

Vector ProblemInstance::grad(const Vector& x) const {
  require_dim(*this, x);
  if (is_builtin(objective.kind)) {
    const double u = x[1] - x[2];
    const double hp = -10.0 * u + 4.0 * fig_quartic_coef(objective.kind) * u * u * u;
    Vector g(3);
    g << 80.0 * (x[0] - 0.5), hp, -hp;
    return g;
  }
  Vector g = objective.Q * x + objective.c;
  if (objective.sigma != 0.0) g += objective.sigma * x.array().cube().matrix();
  return g;
}

double ProblemInstance::eval_grad(const Vector& x, Vector& g) const {
  if (is_builtin(objective.kind)) {
    g = grad(x);
    return eval(x);
  }
  require_dim(*this, x);
  const Vector Qx = objective.Q * x;
  g = Qx + objective.c;
  double v = 0.5 * x.dot(Qx) + objective.c.dot(x);
  if (objective.sigma != 0.0) {
    g += objective.sigma * x.array().cube().matrix();
    v += 0.25 * objective.sigma * x.array().pow(4).sum();
  }
  return v;
}

Matrix ProblemInstance::hessian(const Vector& x) const {
  require_dim(*this, x);
  if (is_builtin(objective.kind)) {
    const double u = x[1] - x[2];
    const double hpp = -10.0 + 12.0 * fig_quartic_coef(objective.kind) * u * u;
    Matrix H = Matrix::Zero(3, 3);
    H(0, 0) = 80.0;
    H(1, 1) = hpp;
    H(2, 2) = hpp;
    H(1, 2) = -hpp;
    H(2, 1) = -hpp;
    return H;
  }
  Matrix H = objective.Q;
  if (objective.sigma != 0.0) H.diagonal() += 3.0 * objective.sigma * x.cwiseAbs2();
  return H;
}

void ProblemInstance::validate() const {
  const Index n = A.cols();
  const Index m = A.rows();
  if (m < 1 || m > n) throw DomainError("instance requires 1 <= m <= n");
  if (b.size() != m || x0.size() != n) throw DomainError("instance b/x0 dimensions mismatch");
  if (!A.allFinite() || !b.allFinite()) throw DomainError("instance data not finite");
  require_full_row_rank(A);
  if (is_builtin(objective.kind)) {
    if (n != 3) throw DomainError("built-in objectives are defined on n = 3");
  } else {
    if (objective.Q.rows() != n || objective.Q.cols() != n || objective.c.size() != n) {
      throw DomainError("objective Q/c dimensions mismatch");
    }
    if ((objective.Q - objective.Q.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, objective.Q.cwiseAbs().maxCoeff())) {
      throw DomainError("objective Q is not symmetric");
    }
  }
  const auto& k = constants;
  if (!(k.l > 0.0 && k.rho > 0.0 && k.l_phi > 0.0 && k.gamma > 0.0 && k.gamma <= 1.0)) {
    throw DomainError("regularity constants must be positive with gamma <= 1");
  }
  if (!((x0.array() > 0.0).all())) throw DomainError("declared interior point is not positive");
  if ((A * x0 - b).norm() > 1e-9 * (1.0 + b.norm())) {
    throw DomainError("declared interior point violates A x = b");
  }
}

ProblemInstance builtin_fig1() {
  static const ProblemInstance inst = [] {
    ProblemInstance p = make_fig(ObjectiveKind::kFig1);
    p.constants = estimate_constants(p, 2000, 1);
    return p;
  }();
  return inst;
}

ProblemInstance builtin_fig2() {
  static const ProblemInstance inst = [] {
    ProblemInstance p = make_fig(ObjectiveKind::kFig2);
    p.constants = estimate_constants(p, 2000, 1);
    return p;
  }();
  return inst;
}

namespace {

ProblemInstance generate(const GeneratorSpec& spec, bool estimate) {
  const Index n = spec.n;
  const Index m = spec.m;
  if (!(m >= 1 && m <= n)) throw DomainError("generator requires 1 <= m <= n");
  if (!(spec.sigma >= 0.0)) throw DomainError("generator requires sigma >= 0");
  const bool concave = spec.kind == "concave";
  if (!concave && spec.kind != "quartic") {
    throw DomainError("unknown generator kind '" + spec.kind + "'");
  }

  std::mt19937_64 rng(spec.seed);
  ProblemInstance p;
  p.generator = spec;
  p.A = random_constraints(n, m, rng);
  p.x0 = uniform_interior(n, rng);
  p.b = p.A * p.x0;
  const double sn = std::sqrt(static_cast<double>(n));
  Matrix G = gaussian(n, n, rng);
  if (concave) {
    p.name = "concave";
    p.objective.kind = ObjectiveKind::kConcaveQuadratic;
    p.objective.sigma = 0.0;
    p.objective.Q = -(G.transpose() * G) / static_cast<double>(n);
    p.objective.Q = 0.5 * (p.objective.Q + p.objective.Q.transpose()).eval();
    Vector c = gaussian(n, 1, rng).col(0);
    p.objective.c = c.normalized();
  } else {
    p.name = "quartic";
    p.objective.kind = ObjectiveKind::kQuartic;
    p.objective.sigma = spec.sigma;
    Matrix Q = (G + G.transpose()) / (2.0 * sn);
    if (m < n) {
      // Plant curvature −1 along X₀⁻¹w/‖X₀⁻¹w‖ for a unit w ∈ ker(A), in the scaled metric.
      Eigen::LLT<Matrix> AAt(p.A * p.A.transpose());
      Vector w = project_kernel(p.A, AAt, gaussian(n, 1, rng).col(0)).normalized();
      const double quart = 3.0 * spec.sigma * (p.x0.cwiseAbs2().cwiseProduct(w.cwiseAbs2())).sum();
      const double shift = w.dot(Q * w) + quart + w.cwiseQuotient(p.x0).squaredNorm();
      Q -= shift * (w * w.transpose());
    }
    p.objective.Q = Q;
    p.objective.c = -(Q * p.x0 + spec.sigma * p.x0.array().cube().matrix());
  }
  p.f_lower_bound = quartic_lower_bound(p);
  if (estimate) {
    const int samples = n <= kDenseEstimateMax ? 200 : 12;
    p.constants = estimate_constants(p, samples, spec.seed ^ 0x5eedULL);
  }
  return p;
}

}  // namespace

ProblemInstance gen_quartic(Index n, Index m, double sigma, uint64_t seed) {
  return generate(GeneratorSpec{"quartic", n, m, sigma, seed}, true);
}

ProblemInstance gen_concave(Index n, Index m, uint64_t seed) {
  return generate(GeneratorSpec{"concave", n, m, 0.0, seed}, true);
}

ProblemInstance materialize(const GeneratorSpec& spec) { return generate(spec, false); }

Matrix fd_hessian(const ProblemInstance& instance, const Vector& x, double* asymmetry) {
  const Index n = x.size();
  const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  Matrix H(n, n);
  Vector xp = x;
  for (Index j = 0; j < n; ++j) {
    const double h = h0 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    Vector gp = instance.grad(xp);
    xp[j] = x[j] - h;
    Vector gm = instance.grad(xp);
    xp[j] = x[j];
    H.col(j) = (gp - gm) / (2.0 * h);
  }
  if (asymmetry != nullptr) {
    *asymmetry = (H - H.transpose()).cwiseAbs().maxCoeff() /
                 std::max(1.0, H.cwiseAbs().maxCoeff());
  }
  return 0.5 * (H + H.transpose());
}

Vector fd_hessian_vector(const ProblemInstance& instance, const Vector& x, const Vector& v) {
  const double vn = v.norm();
  if (vn == 0.0) return Vector::Zero(x.size());
  const double h =
      std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, x.cwiseAbs().maxCoeff());
  const Vector u = v / vn;
  return (instance.grad(x + h * u) - instance.grad(x - h * u)) * (vn / (2.0 * h));
}

RegularityConstants estimate_constants(const ProblemInstance& instance, int samples,
                                       uint64_t seed) {
  const Matrix& A = instance.A;
  const Index n = instance.n();
  const Index m = instance.m();
  const bool dense = n <= kDenseEstimateMax;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  Eigen::LLT<Matrix> AAt(A * A.transpose());

  Vector x = analytic_center(A, instance.b, instance.x0).x0;
  double l_max = 0.0;
  double rho_max = 0.0;
  double lphi_max = 0.0;
  const double radii[] = {0.1, 0.5};

  for (int s = 0; s < samples; ++s) {
    // Hit-and-run moves inside {Ax = b, x > 0}.
    for (int move = 0; move < 3 && m < n; ++move) {
      Vector z(n);
      for (Index i = 0; i < n; ++i) z[i] = normal(rng);
      Vector d = project_kernel(A, AAt, z);
      double tmin = -std::numeric_limits<double>::infinity();
      double tmax = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < n; ++i) {
        if (d[i] > 0.0) tmin = std::max(tmin, -x[i] / d[i]);
        if (d[i] < 0.0) tmax = std::min(tmax, -x[i] / d[i]);
      }
      if (!std::isfinite(tmin) || !std::isfinite(tmax)) continue;
      const double t = 0.999 * (tmin + unif(rng) * (tmax - tmin));
      x += t * d;
    }

    const Vector g = instance.grad(x);
    const Vector xg = x.cwiseProduct(g);
    lphi_max = std::max({lphi_max, xg.norm(), (xg.array() - 1.0).matrix().norm()});
    if (m == n) continue;

    // Random unit direction in ker(AX).
    Vector dir(n);
    for (Index i = 0; i < n; ++i) dir[i] = normal(rng);
    dir = project_exact(A, x, dir.cwiseQuotient(x)).normalized();

    if (dense) {
      const Matrix Z = nullspace_basis(A, x);
      const Matrix XHX = x.asDiagonal() * fd_hessian(instance, x) * x.asDiagonal();
      l_max = std::max(l_max, restricted_norm(XHX, Z));
      for (double r : radii) {
        const Vector xr = x.cwiseProduct((Vector::Ones(n) + r * dir));
        const Matrix XHXr = x.asDiagonal() * fd_hessian(instance, xr) * x.asDiagonal();
        rho_max = std::max(rho_max, restricted_norm(XHXr - XHX, Z) / r);
      }
    } else {
      auto scaled_hv = [&](const Vector& at) {
        return [&, at](const Vector& v) {
          return x.cwiseProduct(fd_hessian_vector(instance, at, x.cwiseProduct(v)));
        };
      };
      l_max = std::max(l_max, restricted_norm_power(A, x, scaled_hv(x), rng));
      for (double r : radii) {
        const Vector xr = x.cwiseProduct((Vector::Ones(n) + r * dir));
        auto diff = [&](const Vector& v) {
          return (x.cwiseProduct(fd_hessian_vector(instance, xr, x.cwiseProduct(v))) -
                  x.cwiseProduct(fd_hessian_vector(instance, x, x.cwiseProduct(v))))
              .eval();
        };
        rho_max = std::max(rho_max, restricted_norm_power(A, x, diff, rng) / r);
      }
    }
  }

  constexpr double kSafety = 1.5;
  constexpr double kFloor = 1e-12;
  RegularityConstants k;
  k.l = std::max(kFloor, kSafety * l_max);
  k.rho = std::max(kFloor, kSafety * rho_max);
  k.l_phi = std::max(kFloor, kSafety * lphi_max);
  k.gamma = 1.0;
  return k;
}

}  // namespace iptr
