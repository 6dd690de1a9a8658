#include "iptr/solver_first.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "iptr/errors.hpp"

namespace iptr {

namespace {

constexpr double kZeroTol = 1e-12;
constexpr long kHardIterCap = 1'000'000'000L;

using Clock = std::chrono::steady_clock;

int64_t elapsed_ns(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
}

double neg_log_sum(const Vector& x) { return -x.array().log().sum(); }

bool zero_direction(double proj_norm, double w_norm) {
  return proj_norm <= kZeroTol * (1.0 + w_norm);
}

// Residual of A·X·r relative to the scale of the projector input.
bool projector_consistent(const Matrix& A, const Vector& x, const Vector& r, const Vector& w) {
  const double scale = A.norm() * x.cwiseAbs().maxCoeff() * w.norm();
  return (A * x.cwiseProduct(r)).norm() <= 1e-9 * std::max(scale, 1e-300);
}

}  // namespace

std::string algo_name(StepMode mode, ObjectiveShape shape) {
  std::string s = mode == StepMode::kExact ? "exact1" : "approx1";
  if (shape == ObjectiveShape::kConcave) s += "-concave";
  return s;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kKkt1Certified:
      return "kkt1-certified";
    case SolveStatus::kBudgetExhausted:
      return "budget-exhausted-near-optimal";
    case SolveStatus::kMaxIters:
      return "max-iters";
    case SolveStatus::kStalled:
      return "stalled-uncertified";
  }
  return "unknown";
}

void require_interior(const ProblemInstance& instance, const Vector& x) {
  if (!((x.array() > 0.0).all()) || !x.allFinite()) {
    throw NumericalError("iterate left the open positive orthant");
  }
  const double res = (instance.A * x - instance.b).norm();
  if (res > 1e-8 * (1.0 + instance.b.norm())) {
    throw NumericalError("iterate violates A x = b (residual " + std::to_string(res) + ")");
  }
}

ResolvedParams resolve_params(const ProblemInstance& instance, const SolverConfig& config) {
  const double eps = config.epsilon;
  const PotentialContext ctx(instance, eps);
  const bool approx = config.mode == StepMode::kApprox;
  const bool concave = config.shape == ObjectiveShape::kConcave;
  const auto& k = instance.constants;
  if (approx && eps > std::min(k.gamma, 0.5)) {
    throw DomainError("approximate modes require epsilon in (0, min{gamma, 1/2}] = (0, " +
                      std::to_string(std::min(k.gamma, 0.5)) + "], got " + std::to_string(eps));
  }

  ResolvedParams p;
  p.epsilon = eps;
  if (config.beta) {
    p.beta = *config.beta;
  } else if (concave) {
    p.beta = 0.5;
  } else if (approx) {
    p.beta = eps / (k.l + 2.0 * eps + 2.0);
  } else {
    p.beta = eps / (k.l + 2.0 * eps);
  }
  if (!(p.beta > 0.0 && p.beta < 1.0)) {
    throw DomainError("trust radius beta must lie in (0, 1), got " + std::to_string(p.beta));
  }

  if (approx) {
    if (config.delta) {
      p.delta = *config.delta;
    } else if (concave) {
      p.delta = (1.0 - p.beta) * eps / (184.0 * k.l_phi);
    } else {
      p.delta = std::min(eps / (15.0 * k.l_phi), p.beta / (92.0 * k.l_phi));
    }
    if (!(p.delta >= 0.0 && p.delta < 0.5)) {
      throw DomainError("lazy tolerance delta must lie in [0, 1/2), got " +
                        std::to_string(p.delta));
    }
  }

  if (concave) {
    p.threshold = (approx ? 0.5 : 1.0) * eps * p.beta * (1.0 - p.beta);
  } else if (approx) {
    p.threshold = eps * eps / (2.0 * k.l + 4.0 * eps + 4.0);
  } else {
    p.threshold = eps * eps / (4.0 * k.l + 4.0 * eps);
  }

  const CenterResult center = analytic_center(instance.A, instance.b, instance.x0);
  if (config.x_start) {
    p.x_start = *config.x_start;
    // C₀ for an arbitrary start: F(x_start) − F(x_c) + c0(x_c) with F = −Σ ln x.
    p.c0 = neg_log_sum(p.x_start) - neg_log_sum(center.x0) + center.c0;
  } else {
    p.x_start = center.x0;
    p.c0 = center.c0;
  }
  require_interior(instance, p.x_start);

  if (config.max_iters) {
    p.budget = *config.max_iters;
    p.budget_from_formula = false;
    if (p.budget < 0) throw DomainError("max_iters must be nonnegative");
  } else {
    const std::optional<double> lb =
        config.f_lower_bound ? config.f_lower_bound : instance.f_lower_bound;
    if (!lb) throw DomainError("iteration budget needs an f lower bound; none supplied");
    p.f_lower_bound = *lb;
    const double gap = std::max(0.0, instance.eval(p.x_start) - *lb) + (p.c0 - 1.0) * eps;
    double T;
    if (concave) {
      T = (approx ? 2.0 : 1.0) * gap / (eps * p.beta * (1.0 - p.beta));
    } else if (approx) {
      T = gap * (2.0 * k.l + 4.0 * eps + 4.0) / (eps * eps);
    } else {
      T = gap * (4.0 * k.l + 4.0 * eps) / (eps * eps);
    }
    p.budget = static_cast<long>(std::clamp(std::ceil(T), 1.0, static_cast<double>(kHardIterCap)));
  }
  return p;
}

ExactStep step_exact_first(const ProblemInstance& instance, const PotentialContext& ctx,
                           const Vector& x, const Vector& grad_f, double beta) {
  const Matrix& A = instance.A;
  ExactStep s;
  const Vector w = scaled_potential_grad(x, grad_f, ctx.epsilon);
  auto K = factor_weighted_gram(A, x.cwiseAbs2());
  s.diag.v = -K.solve(A * x.cwiseProduct(w));
  s.diag.projected = w + x.cwiseProduct(A.transpose() * s.diag.v);
  s.diag.proj_norm = s.diag.projected.norm();
  s.diag.xgphi_norm = w.norm();
  s.diag.zero = zero_direction(s.diag.proj_norm, s.diag.xgphi_norm);
  s.d = s.diag.zero ? Vector::Zero(x.size()).eval()
                    : (-beta / s.diag.proj_norm * s.diag.projected).eval();
  return s;
}

ExactStep step_exact_first(const ProblemInstance& instance, const PotentialContext& ctx,
                           const Vector& x, double beta) {
  return step_exact_first(instance, ctx, x, instance.grad(x), beta);
}

ApproxStep step_approx_first(const ProblemInstance& instance, const PotentialContext& ctx,
                             const Vector& x, const Vector& grad_f, double beta,
                             LazyTracker* tracker, InverseCache& cache) {
  const Matrix& A = instance.A;
  ApproxStep s;
  const Vector w = scaled_potential_grad(x, grad_f, ctx.epsilon);

  auto project = [&] {
    s.diag.v = -(cache.kinv * (A * x.cwiseProduct(w)));
    s.diag.projected =
        w + cache.xbar_sq_diag.cwiseQuotient(x).cwiseProduct(A.transpose() * s.diag.v);
    return s.diag.projected.allFinite() && projector_consistent(A, x, s.diag.projected, w);
  };
  if (!project()) {
    cache = InverseCache::build(A, tracker ? tracker->xbar() : x, cache.tolerance);
    s.diag.rebuilt = true;
    if (!project()) throw NumericalError("approximate projector inconsistent after rebuild");
  }
  s.diag.proj_norm = s.diag.projected.norm();
  s.diag.xgphi_norm = w.norm();
  s.diag.zero = zero_direction(s.diag.proj_norm, s.diag.xgphi_norm);
  if (s.diag.zero) {
    s.d = Vector::Zero(x.size());
    s.x_next = x;
    return s;
  }
  s.d = -beta / s.diag.proj_norm * s.diag.projected;
  s.x_next = x + x.cwiseProduct(s.d);

  std::vector<double> vals;
  if (tracker) {
    s.refreshed = tracker->advance(s.x_next);
    vals.reserve(s.refreshed.indices.size());
    for (Index i : s.refreshed.indices) vals.push_back(std::exp(tracker->ln_xbar()[i]));
  } else {
    s.refreshed.indices.resize(static_cast<size_t>(x.size()));
    for (Index i = 0; i < x.size(); ++i) s.refreshed.indices[static_cast<size_t>(i)] = i;
    vals.assign(s.x_next.data(), s.x_next.data() + s.x_next.size());
  }
  try {
    cache = woodbury_update(std::move(cache), A, s.refreshed.indices, vals);
  } catch (const DegenerateUpdateError&) {
    cache = InverseCache::build(A, tracker ? tracker->xbar() : s.x_next, cache.tolerance);
  }
  s.diag.rebuilt = s.diag.rebuilt || cache.last_update == UpdateKind::kRebuild;
  return s;
}

FirstOrderEngine::FirstOrderEngine(const ProblemInstance& instance, const PotentialContext& ctx,
                                   StepMode mode, double beta, double delta, bool adaptive_beta)
    : instance_{&instance},
      ctx_{ctx},
      mode_{mode},
      beta_{beta},
      delta_{delta},
      adaptive_beta_{adaptive_beta} {}

void FirstOrderEngine::reset(const Vector& x) {
  x_ = x;
  f_ = instance_->eval_grad(x_, g_);
  phi_ = f_ + ctx_.epsilon * neg_log_sum(x_);
  if (mode_ == StepMode::kApprox) {
    tracker_.reset();
    if (delta_ > 0.0) tracker_.emplace(x_, delta_);
    cache_ = InverseCache::build(instance_->A, x_);
  }
}

FirstOrderEngine::Proposal FirstOrderEngine::propose() {
  Proposal p;
  double beta = beta_;
  if (mode_ == StepMode::kExact) {
    ExactStep s = step_exact_first(*instance_, ctx_, x_, g_, beta_);
    if (adaptive_beta_ && !s.diag.zero) {
      const auto& k = instance_->constants;
      beta = std::min(0.25, std::max(beta_, s.diag.proj_norm / (k.l + 2.0 * ctx_.epsilon + 2.0)));
      s.d *= beta / beta_;
    }
    p.diag = std::move(s.diag);
    p.x_next = x_ + x_.cwiseProduct(s.d);
    p.step_norm = s.d.norm();
  } else {
    ApproxStep s = step_approx_first(*instance_, ctx_, x_, g_, beta_, tracker_ ? &*tracker_ : nullptr,
                                     cache_);
    p.diag = std::move(s.diag);
    p.x_next = std::move(s.x_next);
    p.step_norm = s.d.norm();
    p.q = static_cast<long>(s.refreshed.indices.size());
  }
  if (p.diag.zero) {
    p.f_next = f_;
    p.g_next = g_;
    p.phi_next = phi_;
    return p;
  }
  if (!((p.x_next.array() > 0.0).all())) throw NumericalError("step left the positive orthant");
  p.f_next = instance_->eval_grad(p.x_next, p.g_next);
  p.phi_next = p.f_next + ctx_.epsilon * neg_log_sum(p.x_next);
  return p;
}

void FirstOrderEngine::accept(Proposal&& p) {
  x_ = std::move(p.x_next);
  g_ = std::move(p.g_next);
  f_ = p.f_next;
  phi_ = p.phi_next;
}

SolveOutcome solve_first_order(const ProblemInstance& instance, const SolverConfig& config) {
  SolveOutcome out;
  out.params = resolve_params(instance, config);
  const ResolvedParams& prm = out.params;
  const PotentialContext ctx(instance, config.epsilon);
  const std::string algo = algo_name(config.mode, config.shape);
  const bool adaptive = config.adaptive_beta && config.mode == StepMode::kExact;
  FirstOrderEngine engine(instance, ctx, config.mode, prm.beta, prm.delta, adaptive);
  engine.reset(prm.x_start);

  const int every = std::max(1, config.trace_every);
  const double beta_cap = adaptive ? 0.25 : prm.beta;
  bool stopped = false;
  Vector last_v;
  long t = 0;
  for (; t < prm.budget; ++t) {
    const auto t0 = Clock::now();
    FirstOrderEngine::Proposal p = engine.propose();
    const int64_t ns = elapsed_ns(t0, Clock::now());
    out.iter_ns.push_back(ns);
    last_v = p.diag.v;

    const double dphi = p.phi_next - engine.phi();
    TraceRow row;
    row.t = t;
    row.algo = algo;
    row.wall_ns = ns;
    row.q_t = p.q;
    row.rebuilt = p.diag.rebuilt;
    row.step_norm = p.step_norm;
    if (config.trace_kkt1 && p.diag.projected.size() > 0) {
      row.kkt1_resid = (p.diag.projected.array() + config.epsilon).abs().maxCoeff();
    }

    if (p.diag.zero || (config.stop_rule && dphi > -prm.threshold)) {
      row.phi = engine.phi();
      row.f = engine.f();
      row.potential_delta = p.diag.zero ? 0.0 : dphi;
      row.step_norm = 0.0;
      row.event = "terminal";
      out.trace.push_back(std::move(row));
      stopped = true;
      break;
    }

    const double log_change = (p.x_next.array().log() - engine.x().array().log()).matrix().norm();
    if (log_change > 2.0 * beta_cap * (1.0 + 1e-9)) {
      throw NumericalError("log-change bound violated: " + std::to_string(log_change));
    }
    const Vector d = p.x_next.cwiseQuotient(engine.x()).array() - 1.0;
    if (!barrier_step_bound_check(engine.x(), d, std::max(beta_cap, d.norm()))) {
      throw NumericalError("barrier step bound violated");
    }
    engine.accept(std::move(p));
    require_interior(instance, engine.x());
    out.decreases.push_back(-dphi);

    if (t % every == 0) {
      row.phi = engine.phi();
      row.f = engine.f();
      row.potential_delta = dphi;
      out.trace.push_back(std::move(row));
    }
  }
  out.iters = static_cast<long>(out.decreases.size());
  out.x_final = engine.x();
  out.v_final = last_v;

  if (stopped) {
    out.status = SolveStatus::kKkt1Certified;
  } else {
    out.status = prm.budget_from_formula ? SolveStatus::kBudgetExhausted : SolveStatus::kMaxIters;
    TraceRow row;
    row.t = t;
    row.algo = algo;
    row.phi = engine.phi();
    row.f = engine.f();
    row.event = "budget";
    out.trace.push_back(std::move(row));
  }
  if (config.certify) {
    out.report = check_kkt1(instance, out.x_final, config.epsilon);
    out.v_final = out.report->v;
    if (stopped && !out.report->kkt1_certified()) out.status = SolveStatus::kStalled;
  }
  return out;
}

}  // namespace iptr
