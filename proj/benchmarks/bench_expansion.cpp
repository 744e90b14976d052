#include <benchmark/benchmark.h>

#include "oscillode/harness.hpp"
#include "oscillode/problems.hpp"

namespace {

using namespace oscillode;

const RegisteredProblem& problem_for(int id) {
  static const RegisteredProblem linear = make_linear_example();
  static const RegisteredProblem memristor = make_memristor();
  return id == 0 ? linear : memristor;
}

void BM_BuildExpansion(benchmark::State& state) {
  const RegisteredProblem& problem = problem_for(static_cast<int>(state.range(0)));
  const int order = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(build_expansion(problem.problem, order).nodes().size());
  state.SetLabel(problem.name);
}
BENCHMARK(BM_BuildExpansion)->Args({0, 4})->Args({1, 3})->Args({1, 4})->Unit(benchmark::kMillisecond);

void BM_SolveChain(benchmark::State& state) {
  const RegisteredProblem& problem = problem_for(static_cast<int>(state.range(0)));
  const int order = static_cast<int>(state.range(1));
  for (auto _ : state) {
    Expansion expansion = build_expansion(problem.problem, order);
    solve_nonoscillatory_chain(expansion, problem.t_end);
    benchmark::DoNotOptimize(expansion.chain_solution().size());
  }
  state.SetLabel(problem.name);
}
BENCHMARK(BM_SolveChain)->Args({0, 3})->Args({1, 3})->Unit(benchmark::kMillisecond);

// grid evaluation cost should not depend on omega
void BM_EvaluateTruncated(benchmark::State& state) {
  const RegisteredProblem& problem = problem_for(0);
  static Expansion expansion = [&] {
    Expansion e = build_expansion(problem.problem, 3);
    solve_nonoscillatory_chain(e, problem.t_end);
    return e;
  }();
  const double omega = static_cast<double>(state.range(0));
  const std::vector<double> grid = uniform_grid(problem.t_end, 512);
  for (auto _ : state) {
    for (double t : grid) benchmark::DoNotOptimize(evaluate_truncated(expansion, t, omega, 3));
  }
}
BENCHMARK(BM_EvaluateTruncated)->Arg(500)->Arg(5000)->Arg(50000)->Unit(benchmark::kMillisecond);

// full oscillatory RK; cost grows with omega
void BM_RkReference(benchmark::State& state) {
  const RegisteredProblem& problem = problem_for(0);
  const double omega = static_cast<double>(state.range(0));
  const std::vector<double> grid = uniform_grid(problem.t_end, 512);
  ReferenceOptions options;
  options.force_rk = true;
  for (auto _ : state) benchmark::DoNotOptimize(compute_reference(problem, omega, grid, options).states.size());
}
BENCHMARK(BM_RkReference)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
