#include "iptr/solver_second.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "iptr/errors.hpp"

namespace iptr {

namespace {

constexpr long kHardIterCap = 1'000'000'000L;

using Clock = std::chrono::steady_clock;

int64_t elapsed_ns(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
}

long clamp_count(double v) {
  return static_cast<long>(std::clamp(std::ceil(v), 1.0, static_cast<double>(kHardIterCap)));
}

}  // namespace

std::string to_string(SecondOrderStatus s) {
  switch (s) {
    case SecondOrderStatus::kKkt2Certified:
      return "kkt2-certified";
    case SecondOrderStatus::kBudgetExhausted:
      return "budget-exhausted";
    case SecondOrderStatus::kNcfFailed:
      return "ncf-failed";
  }
  return "unknown";
}

bool ncf_trigger_policy(std::span<const TraceRow> window, double threshold) {
  for (auto it = window.rbegin(); it != window.rend(); ++it) {
    if (it->event == "step" || it->event == "terminal") return it->potential_delta > -threshold;
  }
  throw DomainError("trigger policy needs at least one completed iteration");
}

SecondOrderOutcome solve_second_order(const ProblemInstance& instance,
                                      const SecondOrderConfig& config) {
  const SolverConfig& base = config.base;
  if (base.shape != ObjectiveShape::kGeneral) {
    throw DomainError("second-order solves use the general objective shape");
  }
  if (!(config.delta_total > 0.0 && config.delta_total < 1.0)) {
    throw DomainError("delta_total must lie in (0, 1)");
  }
  SecondOrderOutcome out;
  out.params = resolve_params(instance, base);
  ResolvedParams& prm = out.params;
  const double eps = base.epsilon;
  const auto& k = instance.constants;
  const PotentialContext ctx(instance, eps);
  const bool approx = base.mode == StepMode::kApprox;
  const std::string algo = approx ? "approx-ncf" : "ncf";

  const double f0 = instance.eval(prm.x_start);
  const std::optional<double> lb = base.f_lower_bound ? base.f_lower_bound : instance.f_lower_bound;
  out.required_decrease = curvature_decrease_bound(eps, k.rho);
  if (lb) {
    prm.f_lower_bound = *lb;
    out.ncf_budget = static_cast<long>(std::ceil(std::max(0.0, f0 - *lb) / out.required_decrease)) + 1;
  }

  if (config.ncf) {
    out.ncf = *config.ncf;
  } else {
    if (!lb) throw DomainError("curvature-finder parameters need an f lower bound; none supplied");
    const double drop = std::max(f0 - *lb, 1e-12);
    const double delta0 = std::min(
        config.delta_total, config.delta_total * 9.0 * std::pow(eps, 1.5) / (1024.0 * drop * k.rho * k.rho));
    out.ncf = ncf_params(instance, eps, delta0);
  }

  if (prm.budget_from_formula) {
    const double drop = std::max(0.0, f0 - prm.f_lower_bound);
    const double gap = drop + (prm.c0 - 1.0) * eps;
    const double curv = 2048.0 * drop * k.rho * k.rho / (9.0 * std::pow(eps, 1.5));
    const double first = approx ? 4.0 * gap * (k.l + 2.0 * eps + 2.0) / (eps * eps)
                                : 16.0 * gap * (k.l + eps) / (eps * eps);
    prm.budget = clamp_count(std::max(curv, first));
  }

  FirstOrderEngine engine(instance, ctx, base.mode, prm.beta, prm.delta, false);
  engine.reset(prm.x_start);
  const int every = std::max(1, base.trace_every);
  bool terminated = false;
  long t = 0;
  while (t < prm.budget) {
    const auto t0 = Clock::now();
    FirstOrderEngine::Proposal p = engine.propose();
    const int64_t ns = elapsed_ns(t0, Clock::now());

    TraceRow row;
    row.t = t;
    row.algo = algo;
    row.wall_ns = ns;
    row.q_t = p.q;
    row.rebuilt = p.diag.rebuilt;
    row.step_norm = p.step_norm;
    row.potential_delta = p.diag.zero ? 0.0 : p.phi_next - engine.phi();
    double kkt1_resid = 0.0;
    if (p.diag.projected.size() > 0) {
      kkt1_resid = (p.diag.projected.array() + eps).abs().maxCoeff();
      if (base.trace_kkt1) row.kkt1_resid = kkt1_resid;
    }

    const bool trigger = p.diag.zero || ncf_trigger_policy(std::span(&row, 1), prm.threshold);
    if (!trigger) {
      engine.accept(std::move(p));
      require_interior(instance, engine.x());
      row.phi = engine.phi();
      row.f = engine.f();
      // Iterates passing the cheap first-order check are always logged.
      if (t % every == 0 || kkt1_resid <= 2.0 * eps) out.trace.push_back(std::move(row));
      ++t;
      continue;
    }

    // Potential test failed at x_t: look for negative curvature there.
    const Vector xt = engine.x();
    const double ft = engine.f();
    ++out.ncf_invocations;
    const uint64_t seed = base.seed * 1000003ULL + static_cast<uint64_t>(out.ncf_invocations);
    const auto n0 = Clock::now();
    const CurvatureResult cr = find_negative_curvature_retry(instance, xt, eps, out.ncf, seed);
    TraceRow ev;
    ev.t = t;
    ev.algo = algo;
    ev.phi = engine.phi();
    ev.f = ft;
    ev.potential_delta = row.potential_delta;
    ev.event = cr.found ? "ncf-found" : "ncf-none";
    ev.rayleigh = cr.rayleigh;
    ev.wall_ns = elapsed_ns(n0, Clock::now());
    out.trace.push_back(ev);
    if (!cr.found) {
      terminated = true;
      break;
    }

    const Vector xc = curvature_descent_step(instance, xt, *cr.e_hat, eps, k.rho);
    const double decrease = ft - instance.eval(xc);
    TraceRow cs;
    cs.t = t;
    cs.algo = algo;
    cs.step_norm = (xc.cwiseQuotient(xt).array() - 1.0).matrix().norm();
    cs.rayleigh = cr.rayleigh;
    if (decrease < out.required_decrease) {
      cs.phi = engine.phi();
      cs.f = ft;
      cs.event = "curvature-reject";
      out.trace.push_back(std::move(cs));
      terminated = true;
      break;
    }
    ++out.ncf_successes;
    out.curvature_decreases.push_back(decrease);
    const double phi_before = engine.phi();
    engine.reset(xc);
    require_interior(instance, engine.x());
    cs.phi = engine.phi();
    cs.f = engine.f();
    cs.potential_delta = engine.phi() - phi_before;
    cs.rebuilt = approx;
    cs.event = "curvature-step";
    out.trace.push_back(std::move(cs));
    ++t;
  }
  out.iters = t;
  out.x_final = engine.x();
  if (!terminated) {
    TraceRow row;
    row.t = t;
    row.algo = algo;
    row.phi = engine.phi();
    row.f = engine.f();
    row.event = "budget";
    out.trace.push_back(std::move(row));
  }

  out.status = terminated ? SecondOrderStatus::kKkt2Certified : SecondOrderStatus::kBudgetExhausted;
  if (base.certify) {
    out.report = check_kkt2(instance, out.x_final, eps);
    if (terminated && !out.report->kkt2_certified()) out.status = SecondOrderStatus::kNcfFailed;
  }
  return out;
}

}  // namespace iptr
