#include "iptr/bench.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "iptr/errors.hpp"

namespace iptr {

namespace {

double median(std::vector<int64_t> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double hi = static_cast<double>(v[mid]);
  if (v.size() % 2 == 1) return hi;
  const double lo = static_cast<double>(*std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
  return 0.5 * (lo + hi);
}

double stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

SolverConfig timing_config(const BenchConfig& c, StepMode mode, std::optional<double> delta) {
  SolverConfig s;
  s.epsilon = c.epsilon;
  s.mode = mode;
  s.max_iters = c.iters;
  s.stop_rule = false;
  s.certify = false;
  s.seed = c.seed;
  s.trace_every = std::max<long>(1, c.iters);
  if (mode == StepMode::kApprox) s.delta = delta;
  return s;
}

AlgoTiming time_algo(const ProblemInstance& inst, const BenchConfig& c, StepMode mode,
                     std::optional<double> delta) {
  AlgoTiming t;
  t.algo = algo_name(mode, ObjectiveShape::kGeneral);
  std::vector<int64_t> pooled;
  std::vector<double> per_repeat;
  long q_sum = 0;
  long q_rows = 0;
  for (int r = 0; r < c.repeats; ++r) {
    SolverConfig cfg = timing_config(c, mode, delta);
    cfg.trace_every = 1;
    const SolveOutcome out = solve_first_order(inst, cfg);
    pooled.insert(pooled.end(), out.iter_ns.begin(), out.iter_ns.end());
    per_repeat.push_back(median(out.iter_ns));
    for (const TraceRow& row : out.trace) {
      if (row.event != "step") continue;
      q_sum += row.q_t;
      ++q_rows;
    }
  }
  t.median_iter_ns = median(pooled);
  if (c.repeats > 1) t.repeat_stddev_ns = stddev(per_repeat);
  if (mode == StepMode::kApprox && q_rows > 0) {
    t.mean_q = static_cast<double>(q_sum) / static_cast<double>(q_rows);
  }
  if (c.measure_certification) {
    SolverConfig cfg = timing_config(c, mode, delta);
    cfg.stop_rule = true;
    cfg.max_iters.reset();
    cfg.certify = true;
    const SolveOutcome out = solve_first_order(inst, cfg);
    if (out.status == SolveStatus::kKkt1Certified) t.iters_to_cert = out.iters;
  }
  return t;
}

}  // namespace

BenchSummary run_bench(const ProblemInstance& instance, const BenchConfig& config) {
  if (config.repeats < 1) throw DomainError("repeats must be at least 1");
  if (config.iters < 1) throw DomainError("iters must be at least 1");
  BenchSummary s;
  s.n = instance.n();
  s.m = instance.m();
  s.iters = config.iters;
  s.repeats = config.repeats;
  s.variance_available = config.repeats > 1;
  std::optional<double> delta = config.delta;
  ResolvedParams prm = resolve_params(instance, timing_config(config, StepMode::kApprox, delta));
  if (config.delta) {
    s.delta_rule = "absolute";
  } else if (config.formula_delta) {
    s.delta_rule = "formula";
  } else {
    if (!(config.delta_per_beta > 0.0)) throw DomainError("delta_per_beta must be positive");
    s.delta_rule = "per-beta";
    delta = config.delta_per_beta * prm.beta;
    prm = resolve_params(instance, timing_config(config, StepMode::kApprox, delta));
  }
  s.beta = prm.beta;
  s.delta = prm.delta;
  s.exact = time_algo(instance, config, StepMode::kExact, delta);
  s.approx = time_algo(instance, config, StepMode::kApprox, delta);
  s.speedup = s.approx.median_iter_ns > 0.0 ? s.exact.median_iter_ns / s.approx.median_iter_ns : 0.0;
  return s;
}

BenchSummary run_bench(const BenchConfig& config) {
  return run_bench(gen_quartic(config.n, config.m, config.sigma, config.seed), config);
}

Json bench_to_json(const BenchSummary& s) {
  auto algo = [&](const AlgoTiming& t) {
    Json j;
    j["algo"] = t.algo;
    j["median_iter_ns"] = t.median_iter_ns;
    j["repeat_stddev_ns"] = t.repeat_stddev_ns ? Json(*t.repeat_stddev_ns) : Json("unavailable");
    j["iters_to_cert"] = t.iters_to_cert ? Json(*t.iters_to_cert) : Json(nullptr);
    if (t.mean_q) j["mean_q"] = *t.mean_q;
    return j;
  };
  Json j;
  j["n"] = s.n;
  j["m"] = s.m;
  j["iters"] = s.iters;
  j["repeats"] = s.repeats;
  j["beta"] = s.beta;
  j["delta"] = s.delta;
  j["delta_rule"] = s.delta_rule;
  j["exact"] = algo(s.exact);
  j["approx"] = algo(s.approx);
  j["speedup"] = s.speedup;
  j["variance"] = s.variance_available ? "available" : "unavailable";
  return j;
}

}  // namespace iptr
