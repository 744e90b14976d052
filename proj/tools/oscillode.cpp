// Command line driver: expansion dumps, coefficient solves, references, error
// studies, index tables, cost comparison and slope checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "oscillode/errors.hpp"
#include "oscillode/harness.hpp"
#include "oscillode/problems.hpp"

namespace {

using namespace oscillode;

struct Options {
  std::string problem = "linear_example";
  std::string config;
  std::vector<double> omegas;
  std::optional<int> order;
  std::optional<double> t_end;
  int grid = 512;
  std::string out;
  std::string format = "csv";
  double tol_abs = 1e-10;
  double tol_rel = 1e-10;
  std::optional<double> delta_min;
  std::optional<double> chain_tol;
  std::string cache_dir;
  int table_level = 4;
  bool force_rk = false;
};

void emit(const Options& options, const std::string& text) {
  if (options.out.empty() || options.out == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream file(options.out, std::ios::binary);
  if (!file) throw std::runtime_error(fmt::format("cannot write '{}'", options.out));
  file << text;
}

RegisteredProblem resolve(const Options& options) {
  const ProblemRegistry registry = ProblemRegistry::builtin();
  ProblemConfig config;
  if (!options.config.empty()) config = load_problem_config(options.config);
  const std::string name = config.problem.value_or(options.problem);
  RegisteredProblem entry = registry.find(name);
  if (!options.config.empty() || options.delta_min) entry = apply_config(entry, config, options.delta_min);
  if (options.t_end) entry.t_end = *options.t_end;
  return entry;
}

std::vector<double> omegas_or_default(const Options& options, const RegisteredProblem& problem) {
  return options.omegas.empty() ? problem.omegas : options.omegas;
}

std::vector<int> orders_up_to(const Options& options, const RegisteredProblem& problem) {
  if (!options.order) return problem.orders;
  std::vector<int> orders;
  for (int s = 0; s <= *options.order; ++s) orders.push_back(s);
  return orders;
}

int max_order(const Options& options, const RegisteredProblem& problem) {
  return options.order.value_or(problem.orders.empty() ? 4 : problem.orders.back());
}

ChainOptions chain_options(const Options& options) {
  ChainOptions chain;
  if (options.chain_tol) chain.abs_tol = chain.rel_tol = *options.chain_tol;
  return chain;
}

ReferenceOptions reference_options(const Options& options) {
  ReferenceOptions reference;
  reference.abs_tol = options.tol_abs;
  reference.rel_tol = options.tol_rel;
  reference.force_rk = options.force_rk;
  if (!options.cache_dir.empty()) reference.cache_dir = options.cache_dir;
  return reference;
}

int run_expand(const Options& options) {
  const RegisteredProblem problem = resolve(options);
  const Expansion expansion = build_expansion(problem.problem, max_order(options, problem));
  emit(options, expansion.dump());
  return 0;
}

int run_solve(const Options& options) {
  const RegisteredProblem problem = resolve(options);
  const int s = max_order(options, problem);
  Expansion expansion = build_expansion(problem.problem, s);
  solve_nonoscillatory_chain(expansion, problem.t_end, chain_options(options));
  const std::vector<double> grid = uniform_grid(problem.t_end, options.grid);
  std::vector<CoefficientSample> samples;
  for (double t : grid) samples.push_back(sample_coefficients(expansion, t));

  std::string out = "t,omega,s,component,re,im\n";
  for (double omega : omegas_or_default(options, problem)) {
    for (const CoefficientSample& sample : samples) {
      const CVector y = combine(expansion, sample, omega, s);
      for (Eigen::Index k = 0; k < y.size(); ++k) {
        out += fmt::format("{:.17g},{:.17g},{},{},{:.17g},{:.17g}\n", sample.t, omega, s, k + 1, y[k].real(),
                           y[k].imag());
      }
    }
  }
  emit(options, out);
  return 0;
}

int run_reference(const Options& options) {
  const RegisteredProblem problem = resolve(options);
  const std::vector<double> grid = uniform_grid(problem.t_end, options.grid);
  std::string out = "t,omega,component,re,im\n";
  for (double omega : omegas_or_default(options, problem)) {
    const ReferenceTrajectory reference = compute_reference(problem, omega, grid, reference_options(options));
    fmt::print(stderr, "omega {}: {}{}\n", omega, reference.provenance, reference.from_cache ? " (cached)" : "");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const CVector& y = reference.states[i];
      for (Eigen::Index k = 0; k < y.size(); ++k) {
        out += fmt::format("{:.17g},{:.17g},{},{:.17g},{:.17g}\n", grid[i], omega, k + 1, y[k].real(), y[k].imag());
      }
    }
  }
  emit(options, out);
  return 0;
}

ErrorReport error_study(const Options& options, const RegisteredProblem& problem, std::vector<double> omegas) {
  ErrorStudyOptions study;
  study.omegas = std::move(omegas);
  study.orders = orders_up_to(options, problem);
  study.grid = options.grid;
  study.reference = reference_options(options);
  study.chain = chain_options(options);
  return run_error_study(problem, study);
}

int run_errors(const Options& options) {
  const RegisteredProblem problem = resolve(options);
  const ErrorReport report = error_study(options, problem, omegas_or_default(options, problem));
  for (const ErrorCurve& curve : report.curves) {
    fmt::print(stderr, "omega {:>8g}  s {}  sup|eps| {:.3e}\n", curve.omega, curve.s, curve.sup);
  }
  if (options.format == "svg") {
    const std::string directory = options.out.empty() ? "." : options.out;
    for (const auto& path : emit_svg(report, directory)) fmt::print("{}\n", path.string());
    return 0;
  }
  emit(options, format_error_csv(report));
  return 0;
}

int run_table(const Options& options) {
  const RegisteredProblem problem = resolve(options);
  const int level = options.table_level;
  if (level < 0) throw std::invalid_argument("-r must be nonnegative");
  const auto chain = build_index_chain(problem.problem->frequencies, level);
  emit(options, format_index_table(problem.problem->frequencies, chain.back(), std::max(1, level - 1)));
  return 0;
}

int run_bench(const Options& options) {
  const RegisteredProblem problem = resolve(options);
  CostOptions cost;
  cost.grid = options.grid;
  cost.abs_tol = options.tol_abs;
  cost.rel_tol = options.tol_rel;
  cost.chain = chain_options(options);
  const CostReport report = compare_cost(problem, omegas_or_default(options, problem), max_order(options, problem), cost);
  emit(options, format_cost_csv(report));
  return 0;
}

int run_slope(const Options& options) {
  const RegisteredProblem problem = resolve(options);
  std::vector<double> omegas = options.omegas;
  if (omegas.empty()) omegas = {250.0, 500.0, 1000.0, 2000.0, 4000.0};
  Options adjusted = options;
  if (!adjusted.order) adjusted.order = 3;
  const ErrorReport report = error_study(adjusted, problem, omegas);
  bool ok = true;
  std::string out = "s,slope,expected,within\n";
  for (const SlopeFit& fit : fit_slopes(report)) {
    out += fmt::format("{},{:.6f},{:.1f},{}\n", fit.s, fit.slope, fit.expected, fit.within ? "yes" : "no");
    ok = ok && fit.within;
  }
  emit(options, out);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic expansions for ODEs with several non-commensurate high-frequency forcings"};
  app.require_subcommand(1);
  Options options;

  auto add_common = [&options](CLI::App* sub) {
    sub->add_option("--problem", options.problem, "Registered problem name")->capture_default_str();
    sub->add_option("--config", options.config, "Problem override file (key = value)");
    sub->add_option("--omega", options.omegas, "Oscillatory parameter (repeatable)");
    sub->add_option("--order", options.order, "Truncation order s");
    sub->add_option("--t-end", options.t_end, "End of the time interval");
    sub->add_option("--grid", options.grid, "Number of grid points")->capture_default_str()->check(CLI::Range(2, 10000000));
    sub->add_option("--out", options.out, "Output file (directory for svg)");
    sub->add_option("--format", options.format, "csv or svg")->check(CLI::IsMember({"csv", "svg"}))->capture_default_str();
    sub->add_option("--tol-abs", options.tol_abs, "Reference absolute tolerance")->capture_default_str();
    sub->add_option("--tol-rel", options.tol_rel, "Reference relative tolerance")->capture_default_str();
    sub->add_option("--delta-min", options.delta_min, "Small-denominator threshold");
    sub->add_option("--chain-tol", options.chain_tol, "Tolerance for the non-oscillatory coefficient ODEs");
    sub->add_option("--cache-dir", options.cache_dir, "Directory for cached RK references");
  };

  auto* expand = app.add_subcommand("expand", "Dump the coefficient table of the expansion");
  auto* solve = app.add_subcommand("solve", "Evaluate the truncated expansion on the grid");
  auto* reference = app.add_subcommand("reference", "Solve the full oscillatory problem on the grid");
  auto* errors = app.add_subcommand("errors", "Error study eps_s(t, omega) against the reference");
  auto* table = app.add_subcommand("table", "Print the frequency index set U_r");
  auto* bench = app.add_subcommand("bench", "Compare expansion and RK cost across omega");
  auto* slope = app.add_subcommand("slope", "Fit the log-log decay of the error in omega");
  for (auto* sub : {expand, solve, reference, errors, table, bench, slope}) add_common(sub);
  table->add_option("-r", options.table_level, "Index set level")->capture_default_str();
  reference->add_flag("--force-rk", options.force_rk, "Use RK even when an exact solution exists");
  errors->add_flag("--force-rk", options.force_rk, "Use RK even when an exact solution exists");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*expand) return run_expand(options);
    if (*solve) return run_solve(options);
    if (*reference) return run_reference(options);
    if (*errors) return run_errors(options);
    if (*table) return run_table(options);
    if (*bench) return run_bench(options);
    if (*slope) return run_slope(options);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
