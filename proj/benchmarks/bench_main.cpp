#include <benchmark/benchmark.h>

#include "lrmr/bench.hpp"
#include "lrmr/irlsm.hpp"
#include "lrmr/matcore.hpp"
#include "lrmr/measure.hpp"

namespace {

struct Problem {
  lrmr::MeasurementOp op;
  lrmr::Vector M;
  lrmr::WeightFactors W;
};

// Completion problem of size n x n at 40% sampling with a rank-r weight
// taken from the planted matrix itself.
Problem make_problem(lrmr::Index n, lrmr::Index r) {
  const lrmr::DenseMatrix X = lrmr::gen_lowrank(n, n, r, 5);
  auto op = lrmr::completion_op(n, n, lrmr::uniform_mask(n, n, 0.4, 6));
  lrmr::Vector M = lrmr::apply(op, X);
  const double eps = 0.5 * lrmr::singular_values(X)(r - 1);
  return {std::move(op), std::move(M), lrmr::weight_update(X, eps)};
}

void BM_UpdateWoodbury(benchmark::State& state) {
  const Problem pr = make_problem(state.range(0), 5);
  for (auto _ : state) benchmark::DoNotOptimize(lrmr::x_update_completion(pr.op, pr.M, pr.W));
}
BENCHMARK(BM_UpdateWoodbury)->Arg(20)->Arg(40)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_UpdateDense(benchmark::State& state) {
  const Problem pr = make_problem(state.range(0), 5);
  for (auto _ : state) benchmark::DoNotOptimize(lrmr::x_update_dense(pr.op, pr.M, pr.W));
}
BENCHMARK(BM_UpdateDense)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Svd(benchmark::State& state) {
  const lrmr::DenseMatrix X = lrmr::gen_lowrank(state.range(0), state.range(0), 10, 1) +
                              1e-3 * lrmr::gen_lowrank(state.range(0), state.range(0),
                                                       state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(lrmr::svd(X));
}
BENCHMARK(BM_Svd)->Arg(100)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PartialSvd(benchmark::State& state) {
  const lrmr::DenseMatrix X = lrmr::gen_lowrank(state.range(0), state.range(0), 10, 1) +
                              1e-3 * lrmr::gen_lowrank(state.range(0), state.range(0),
                                                       state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(lrmr::partial_svd(X, 20));
}
BENCHMARK(BM_PartialSvd)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
  lrmr::TrialSpec spec;
  spec.n = spec.p = state.range(0);
  spec.k = 5;
  spec.kappa = 0.5;
  spec.solver.rank = 5;
  for (auto _ : state) benchmark::DoNotOptimize(lrmr::run_trial(spec, 0));
}
BENCHMARK(BM_Solve)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
