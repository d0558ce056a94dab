#include <benchmark/benchmark.h>

#include "pffc/experiment.hpp"
#include "pffc/verify.hpp"

using namespace pffc;

namespace {

ExperimentConfig sized(int n, int M) {
  ExperimentConfig c = oracle_config();
  c.nx = c.ny = n;
  c.M = M;
  return c;
}

NodalField loaded_state(const ExperimentSetup& s) {
  NodalField U = s.initial_state() + random_direction(s.dofs().size(), 1e-4, 1, &s.dofs());
  return U;
}

void BM_JacobianAssembly(benchmark::State& st) {
  const ExperimentSetup s(sized(static_cast<int>(st.range(0)), 1));
  const NodalField U = loaded_state(s);
  for (auto _ : st) benchmark::DoNotOptimize(s.forms().jacobian(U));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.mesh().num_cells()));
}
BENCHMARK(BM_JacobianAssembly)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Residual(benchmark::State& st) {
  const ExperimentSetup s(sized(static_cast<int>(st.range(0)), 1));
  const NodalField U = loaded_state(s);
  for (auto _ : st) benchmark::DoNotOptimize(s.forms().residual(U));
}
BENCHMARK(BM_Residual)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ForwardStep(benchmark::State& st) {
  const ExperimentSetup s(sized(static_cast<int>(st.range(0)), 1));
  const NodalField q = s.controls().constant(1500.0);
  const NodalField U0 = s.initial_state();
  for (auto _ : st) benchmark::DoNotOptimize(s.forward().step(1, q, U0));
}
BENCHMARK(BM_ForwardStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_HessianVector(benchmark::State& st) {
  const ExperimentSetup s(sized(static_cast<int>(st.range(0)), 5));
  const auto cost = s.make_cost(s.config().params.alpha);
  const ReducedProblem problem(s.forward(), *cost, s.desired(), s.initial_state(), s.sensitivity_options());
  const auto at = problem.evaluate(s.controls().constant(1500.0));
  auto sens = problem.linearize(at);
  (void)sens->adjoint();
  const NodalField dq = random_direction(s.controls().size(), 1000.0, 2);
  for (auto _ : st) benchmark::DoNotOptimize(problem.hessian_vector(*sens, dq));
}
BENCHMARK(BM_HessianVector)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
