#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "iptr/instance_io.hpp"
#include "iptr/problems.hpp"
#include "iptr/solver_first.hpp"

namespace iptr {

struct BenchConfig {
  Index n = 200;
  Index m = 100;
  double sigma = 1.0;
  uint64_t seed = 1;
  long iters = 2000;
  int repeats = 5;
  double epsilon = 0.1;
  /// Absolute lazy tolerance for approx1; wins over the other δ settings.
  std::optional<double> delta;
  /// Default δ = delta_per_beta·β, so the refreshed fraction is comparable across sizes.
  double delta_per_beta = 4.0;
  /// Use the solver's formula δ instead, which is below 1e-6 at bench sizes.
  bool formula_delta = false;
  /// Also run both algorithms with the stop rule and record iterations to certification.
  bool measure_certification = false;
};

struct AlgoTiming {
  std::string algo;
  /// Median per-iteration step time pooled over all repeats.
  double median_iter_ns = 0.0;
  /// Standard deviation of per-repeat medians; absent with one repeat.
  std::optional<double> repeat_stddev_ns;
  std::optional<long> iters_to_cert;
  /// Mean refreshed coordinates per iteration (approx1 only).
  std::optional<double> mean_q;
};

struct BenchSummary {
  Index n = 0;
  Index m = 0;
  long iters = 0;
  int repeats = 0;
  AlgoTiming exact;
  AlgoTiming approx;
  /// exact.median_iter_ns / approx.median_iter_ns
  double speedup = 0.0;
  bool variance_available = false;
  double beta = 0.0;
  double delta = 0.0;
  /// "absolute", "per-beta" or "formula".
  std::string delta_rule;
};

/**
 * Times exact1 and approx1 for a fixed number of iterations on one generated quartic, with
 * the stop rule and certification disabled. Repeats run sequentially.
 */
BenchSummary run_bench(const BenchConfig& config);

/// Same protocol on a given instance.
BenchSummary run_bench(const ProblemInstance& instance, const BenchConfig& config);

Json bench_to_json(const BenchSummary& s);

}  // namespace iptr
