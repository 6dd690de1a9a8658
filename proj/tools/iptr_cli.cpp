#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "iptr/bench.hpp"
#include "iptr/errors.hpp"
#include "iptr/instance_io.hpp"
#include "iptr/kkt.hpp"
#include "iptr/negcurve.hpp"
#include "iptr/solver_first.hpp"
#include "iptr/solver_second.hpp"
#include "iptr/trace.hpp"

using namespace iptr;

namespace {

constexpr int kExitCertified = 0;
constexpr int kExitError = 1;
constexpr int kExitBudget = 2;
constexpr int kExitFailed = 3;

Json report_to_json(const KktReport& r) {
  Json j;
  j["v"] = vector_to_json(r.v);
  j["stationarity_inf"] = r.stationarity_inf;
  j["dual_min"] = r.dual_min;
  j["feasibility_res"] = r.feasibility_res;
  j["feasibility_tol"] = r.feasibility_tol;
  j["feasible"] = r.feasible();
  j["min_coord"] = r.min_coord;
  j["projected_min_eig"] = r.projected_min_eig ? Json(*r.projected_min_eig) : Json(nullptr);
  if (r.fd_asymmetry) j["fd_asymmetry"] = *r.fd_asymmetry;
  j["unreliable"] = r.unreliable;
  j["thresholds"] = Json::array({r.eps1, r.eps2});
  j["kkt1_certified"] = r.kkt1_certified();
  j["kkt2_certified"] = r.kkt2_certified();
  return j;
}

Json params_to_json(const ResolvedParams& p) {
  return Json{{"epsilon", p.epsilon},   {"beta", p.beta},
              {"delta", p.delta},       {"threshold", p.threshold},
              {"budget", p.budget},     {"budget_from_formula", p.budget_from_formula},
              {"c0", p.c0},             {"f_lower_bound", p.f_lower_bound}};
}

Vector load_point(const std::string& path) {
  const Json j = read_json_file(path);
  return vector_from_json(j.is_object() ? j.at("x") : j);
}

void write_json(const std::string& path, const Json& j) { write_text_file(path, dump_json(j) + "\n"); }

template <class T>
void from_config(const Json& cfg, const char* key, std::optional<T>& into) {
  if (!into && cfg.contains(key) && !cfg.at(key).is_null()) into = cfg.at(key).get<T>();
}

struct SolveArgs {
  std::string instance;
  std::string algo = "exact1";
  std::optional<double> eps;
  std::optional<uint64_t> seed;
  std::string trace_out;
  std::string out = "solution";
  std::string config;
  std::optional<double> beta;
  std::optional<double> delta;
  std::optional<long> max_iters;
  std::optional<int> trace_every;
  std::optional<double> f_lb;
  std::optional<double> delta_total;
  std::optional<long> ncf_iters;
  std::optional<double> ncf_r;
  bool no_stop_rule = false;
  bool adaptive_beta = false;
  bool trace_kkt1 = false;
};

int cmd_solve(const SolveArgs& a) {
  const ProblemInstance inst = load_instance(a.instance);
  Json cfg = a.config.empty() ? Json::object() : read_json_file(a.config);

  // Command-line flags take precedence over the config file.
  std::optional<double> eps = a.eps, beta = a.beta, delta = a.delta, f_lb = a.f_lb;
  std::optional<double> delta_total = a.delta_total, ncf_r = a.ncf_r;
  std::optional<long> max_iters = a.max_iters, ncf_iters = a.ncf_iters;
  std::optional<int> trace_every = a.trace_every;
  std::optional<uint64_t> seed = a.seed;
  std::optional<bool> stop_rule = a.no_stop_rule ? std::optional<bool>(false) : std::nullopt;
  std::optional<bool> adaptive = a.adaptive_beta ? std::optional<bool>(true) : std::nullopt;
  std::optional<bool> trace_kkt1 = a.trace_kkt1 ? std::optional<bool>(true) : std::nullopt;
  from_config(cfg, "epsilon", eps);
  from_config(cfg, "beta", beta);
  from_config(cfg, "delta", delta);
  from_config(cfg, "f_lower_bound", f_lb);
  from_config(cfg, "delta_total", delta_total);
  from_config(cfg, "max_iters", max_iters);
  from_config(cfg, "trace_every", trace_every);
  from_config(cfg, "seed", seed);
  from_config(cfg, "stop_rule", stop_rule);
  from_config(cfg, "adaptive_beta", adaptive);
  from_config(cfg, "trace_kkt1", trace_kkt1);
  if (cfg.contains("ncf")) {
    from_config(cfg.at("ncf"), "calT", ncf_iters);
    from_config(cfg.at("ncf"), "r", ncf_r);
  }

  SolverConfig base;
  base.epsilon = eps.value_or(0.1);
  base.beta = beta;
  base.delta = delta;
  base.max_iters = max_iters;
  base.stop_rule = stop_rule.value_or(true);
  base.seed = seed.value_or(0);
  base.trace_every = trace_every.value_or(1);
  base.f_lower_bound = f_lb;
  base.adaptive_beta = adaptive.value_or(false);
  base.trace_kkt1 = trace_kkt1.value_or(false);

  const std::string& algo = a.algo;
  const bool second = algo == "ncf" || algo == "approx-ncf";
  base.mode = (algo == "approx1" || algo == "approx-ncf" || algo == "approx1-concave")
                  ? StepMode::kApprox
                  : StepMode::kExact;
  base.shape = (algo == "exact1-concave" || algo == "approx1-concave") ? ObjectiveShape::kConcave
                                                                       : ObjectiveShape::kGeneral;

  Json summary;
  summary["instance"] = inst.name;
  summary["algo"] = algo;
  int code = kExitError;
  IterTrace trace;
  Vector x_final;
  std::optional<KktReport> report;
  if (second) {
    SecondOrderConfig sc;
    sc.base = base;
    sc.delta_total = delta_total.value_or(0.05);
    if (ncf_iters || ncf_r) {
      NcfParams p = ncf_params(inst, base.epsilon, sc.delta_total);
      if (ncf_iters) p.calT = *ncf_iters;
      if (ncf_r) p.r = *ncf_r;
      sc.ncf = p;
    }
    SecondOrderOutcome out = solve_second_order(inst, sc);
    summary["status"] = to_string(out.status);
    summary["iters"] = out.iters;
    summary["ncf_invocations"] = out.ncf_invocations;
    summary["ncf_successes"] = out.ncf_successes;
    summary["ncf"] = Json{{"delta0", out.ncf.delta0}, {"calT", out.ncf.calT}, {"r", out.ncf.r}};
    summary["params"] = params_to_json(out.params);
    code = out.status == SecondOrderStatus::kKkt2Certified ? kExitCertified
           : out.status == SecondOrderStatus::kBudgetExhausted ? kExitBudget
                                                                : kExitFailed;
    trace = std::move(out.trace);
    x_final = out.x_final;
    report = out.report;
  } else {
    SolveOutcome out = solve_first_order(inst, base);
    summary["status"] = to_string(out.status);
    summary["iters"] = out.iters;
    summary["params"] = params_to_json(out.params);
    switch (out.status) {
      case SolveStatus::kKkt1Certified:
        code = kExitCertified;
        break;
      case SolveStatus::kBudgetExhausted:
      case SolveStatus::kMaxIters:
        code = kExitBudget;
        break;
      case SolveStatus::kStalled:
        code = kExitFailed;
        break;
    }
    trace = std::move(out.trace);
    x_final = out.x_final;
    // First-order runs report the projected curvature too, for diagnosis.
    report = check_kkt2(inst, x_final, base.epsilon);
  }
  summary["x_final"] = vector_to_json(x_final);
  summary["f_final"] = inst.eval(x_final);
  if (report) summary["report"] = report_to_json(*report);
  summary["exit_code"] = code;

  if (!a.trace_out.empty()) {
    std::ofstream f(a.trace_out);
    if (!f) throw std::runtime_error("cannot open trace file " + a.trace_out);
    write_trace_csv(f, trace);
  }
  write_json(a.out + ".point.json", Json{{"x", vector_to_json(x_final)}});
  write_json(a.out + ".report.json", summary);
  std::cout << dump_json(summary) << "\n";
  return code;
}

int cmd_check(const std::string& instance, const std::string& point, double eps, bool cheap,
              const std::string& out) {
  const ProblemInstance inst = load_instance(instance);
  const Vector x = load_point(point);
  if (x.size() != inst.n()) throw DomainError("point dimension does not match the instance");
  const KktReport r = cheap ? check_kkt1(inst, x, eps) : check_kkt2(inst, x, eps);
  Json j = report_to_json(r);
  if (cheap) j.erase("projected_min_eig");
  if (cheap) j.erase("kkt2_certified");
  if (!out.empty()) write_json(out, j);
  std::cout << dump_json(j) << "\n";
  const bool ok = cheap ? r.kkt1_certified() : r.kkt2_certified();
  return ok ? kExitCertified : kExitFailed;
}

int cmd_gen(Index n, Index m, double sigma, bool concave, uint64_t seed, const std::string& out) {
  const ProblemInstance inst = concave ? gen_concave(n, m, seed) : gen_quartic(n, m, sigma, seed);
  save_instance(inst, out);
  Json j;
  j["out"] = out;
  j["constants"] = Json{{"l", inst.constants.l},
                        {"rho", inst.constants.rho},
                        {"l_phi", inst.constants.l_phi},
                        {"gamma", inst.constants.gamma}};
  if (inst.f_lower_bound) j["f_lower_bound"] = *inst.f_lower_bound;
  if (!concave && m < n) {
    const Matrix Z = nullspace_basis(inst.A, inst.x0);
    const Matrix XHX = inst.x0.asDiagonal() * inst.hessian(inst.x0) * inst.x0.asDiagonal();
    const Matrix M = Z.transpose() * XHX * Z;
    j["planted_saddle_min_eig"] = symmetric_min_eig(0.5 * (M + M.transpose())).first;
  }
  std::cout << dump_json(j) << "\n";
  return 0;
}

int cmd_bench(const BenchConfig& c, const std::string& out) {
  if (c.n > 4000) {
    std::cerr << "warning: dense Q and A need about "
              << (static_cast<double>(c.n) * static_cast<double>(c.n + c.m) * 8.0 / 1e9)
              << " GB\n";
  }
  const BenchSummary s = run_bench(c);
  const Json j = bench_to_json(s);
  if (!out.empty()) write_json(out, j);
  std::cout << dump_json(j) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interior-point trust-region solver for linearly constrained nonconvex problems"};
  app.require_subcommand(1);

  Index gen_n = 64, gen_m = 32;
  double gen_sigma = 1.0;
  bool gen_concave_flag = false;
  uint64_t gen_seed = 1;
  std::string gen_out = "instance.json";
  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--n", gen_n, "Number of variables")->check(CLI::PositiveNumber);
  gen->add_option("--m", gen_m, "Number of equality constraints")->check(CLI::PositiveNumber);
  gen->add_option("--sigma", gen_sigma, "Quartic coefficient");
  gen->add_flag("--concave", gen_concave_flag, "Concave quadratic instead of quartic");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", gen_out, "Output instance file");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve an instance");
  solve->add_option("instance", sa.instance, "Instance file, or fig1 / fig2")->required();
  solve->add_option("--algo", sa.algo, "Algorithm")
      ->check(CLI::IsMember(
          {"exact1", "approx1", "ncf", "approx-ncf", "exact1-concave", "approx1-concave"}));
  solve->add_option("--eps", sa.eps, "Accuracy epsilon");
  solve->add_option("--seed", sa.seed, "Random seed");
  solve->add_option("--trace-out", sa.trace_out, "CSV trace file");
  solve->add_option("--out", sa.out, "Prefix for <out>.point.json and <out>.report.json");
  solve->add_option("--config", sa.config, "JSON file with solver settings");
  solve->add_option("--beta", sa.beta, "Trust radius");
  solve->add_option("--delta", sa.delta, "Lazy-update tolerance (approximate modes)");
  solve->add_option("--max-iters", sa.max_iters, "Iteration budget");
  solve->add_option("--trace-every", sa.trace_every, "Record every k-th step");
  solve->add_option("--f-lb", sa.f_lb, "Lower bound on f");
  solve->add_option("--delta-total", sa.delta_total, "Failure probability of the curvature search");
  solve->add_option("--ncf-iters", sa.ncf_iters, "Power iterations per curvature search");
  solve->add_option("--ncf-r", sa.ncf_r, "Probe radius of the curvature search");
  solve->add_flag("--no-stop-rule", sa.no_stop_rule, "Run the full budget");
  solve->add_flag("--adaptive-beta", sa.adaptive_beta, "Adaptive trust radius (exact1 only)");
  solve->add_flag("--trace-kkt1", sa.trace_kkt1, "Record first-order residuals in the trace");

  std::string chk_instance, chk_point, chk_out;
  double chk_eps = 0.1;
  bool chk_cheap = false;
  auto* check = app.add_subcommand("check", "Check KKT conditions at a point");
  check->add_option("instance", chk_instance, "Instance file, or fig1 / fig2")->required();
  check->add_option("--point", chk_point, "Point file")->required();
  check->add_option("--eps", chk_eps, "Accuracy epsilon");
  check->add_flag("--cheap", chk_cheap, "Skip the second-order condition");
  check->add_option("--out", chk_out, "Report file");

  BenchConfig bc;
  std::string bench_out;
  std::optional<double> bench_delta;
  auto* bench = app.add_subcommand("bench", "Per-iteration timing of exact1 against approx1");
  bench->add_option("--n", bc.n)->check(CLI::PositiveNumber);
  bench->add_option("--m", bc.m)->check(CLI::PositiveNumber);
  bench->add_option("--sigma", bc.sigma);
  bench->add_option("--seed", bc.seed);
  bench->add_option("--iters", bc.iters)->check(CLI::PositiveNumber);
  bench->add_option("--repeats", bc.repeats)->check(CLI::PositiveNumber);
  bench->add_option("--eps", bc.epsilon);
  bench->add_option("--delta", bench_delta, "Absolute lazy-update tolerance");
  bench->add_option("--delta-per-beta", bc.delta_per_beta, "Default tolerance as a multiple of beta")
      ->check(CLI::PositiveNumber);
  bench->add_flag("--formula-delta", bc.formula_delta, "Use the solver's formula tolerance");
  bench->add_flag("--measure-cert", bc.measure_certification, "Also count iterations to certification");
  bench->add_option("--out", bench_out, "Summary file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*gen) return cmd_gen(gen_n, gen_m, gen_sigma, gen_concave_flag, gen_seed, gen_out);
    if (*solve) return cmd_solve(sa);
    if (*check) return cmd_check(chk_instance, chk_point, chk_eps, chk_cheap, chk_out);
    if (*bench) {
      bc.delta = bench_delta;
      return cmd_bench(bc, bench_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
