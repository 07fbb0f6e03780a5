#include <benchmark/benchmark.h>

#include <colprune/eigensolver.hpp>
#include <colprune/objectives.hpp>
#include <colprune/rng.hpp>
#include <colprune/sensing.hpp>
#include <colprune/solver.hpp>

using namespace colprune;

static void BM_LanczosHessianMinEig(benchmark::State& state) {
  const Index d = state.range(0);
  Rng rng(3);
  const GroundTruth star = gen_ground_truth(d, 3, 0.5, rng);
  RegParams reg;
  reg.beta = 0.01;
  reg.lambda = 0.01;
  const ObjectivePtr f = regularized(population_loss(star), reg);
  const Matrix U = rng.gaussian(d, d, 0.1);
  EigenOptions opts;
  opts.force_iterative = true;
  for (auto _ : state) benchmark::DoNotOptimize(hessian_min_eigenpair(*f, U, opts).value);
}
BENCHMARK(BM_LanczosHessianMinEig)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_GdSteps(benchmark::State& state) {
  const Index d = state.range(0);
  Rng rng(4);
  const GroundTruth star = gen_ground_truth(d, 3, 0.5, rng);
  RegParams reg;
  reg.beta = 0.01;
  reg.lambda = 0.01;
  const ObjectivePtr f = regularized(population_loss(star), reg);
  const Matrix U0 = rng.gaussian(d, d, 0.1);
  GdConfig cfg;
  cfg.step_size = 0.05;
  cfg.max_iters = 1000;
  cfg.trace_stride = 0;
  for (auto _ : state) {
    Rng run(5);
    benchmark::DoNotOptimize(perturbed_gd(*f, U0, cfg, run).final_grad_norm);
  }
  state.SetItemsProcessed(state.iterations() * cfg.max_iters);
}
BENCHMARK(BM_GdSteps)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_GuardedPerturbedGdSteps(benchmark::State& state) {
  Rng rng(6);
  const GroundTruth star = gen_ground_truth(20, 3, 0.5, rng);
  RegParams reg;
  reg.beta = 0.05;
  reg.lambda = 0.2;
  const ObjectivePtr f = regularized(population_loss(star), reg, 0.25);
  const Matrix U0 = rng.gaussian(20, 20, 0.1);
  GdConfig cfg;
  cfg.step_size = 0.125;
  cfg.max_iters = 1000;
  cfg.trace_stride = 0;
  cfg.perturbation = PerturbationKind::uniform_ball;
  cfg.trigger = PerturbTrigger::always;
  cfg.op_norm_guard = 3.0;
  for (auto _ : state) {
    Rng run(7);
    benchmark::DoNotOptimize(perturbed_gd(*f, U0, cfg, run).max_op_norm);
  }
  state.SetItemsProcessed(state.iterations() * cfg.max_iters);
}
BENCHMARK(BM_GuardedPerturbedGdSteps)->Unit(benchmark::kMillisecond);

static void BM_RankOneFlow(benchmark::State& state) {
  Rng rng(8);
  const GroundTruth star = gen_ground_truth(50, 1, 1.0, rng);
  const Matrix U0 = rng.gaussian(50, 50, 1e-4);
  FlowConfig cfg;
  cfg.t_end = 100;
  cfg.record_columns = false;
  for (auto _ : state) benchmark::DoNotOptimize(gradient_flow(star, U0, cfg).accepted_steps);
}
BENCHMARK(BM_RankOneFlow)->Unit(benchmark::kMillisecond);
