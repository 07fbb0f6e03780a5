#include <memory>

#include <benchmark/benchmark.h>

#include <colprune/linalg.hpp>
#include <colprune/objectives.hpp>
#include <colprune/rng.hpp>
#include <colprune/sensing.hpp>

using namespace colprune;

namespace {

struct Fixture {
  GroundTruth star;
  ObjectivePtr pop;
  ObjectivePtr emp;
  ObjectivePtr nn;
  Matrix U;
  Matrix Z;

  Fixture(Index d, Index k, Index n) {
    Rng rng(1);
    star = gen_ground_truth(d, 3, 0.5, rng);
    RegParams reg;
    reg.beta = 0.01;
    reg.lambda = 0.01;
    pop = regularized(population_loss(star), reg);
    emp = regularized(empirical_loss(std::make_shared<const SensingSet>(
                          measure(star, gen_gaussian_sensing(n, d, rng), 0.0, rng))),
                      reg);
    nn = nn_objective(std::make_shared<const SensingSet>(measure(star, gen_rank_one_sensing(n, d, rng), 0.0, rng)),
                      star.factor.squaredNorm(), reg);
    U = rng.gaussian(d, k, 0.1);
    Z = rng.gaussian(d, k);
  }
};

const Fixture& fixture(Index d) {
  static const Fixture f20(20, 20, 1000);
  static const Fixture f50(50, 50, 1000);
  return d == 20 ? f20 : f50;
}

}  // namespace

static void BM_PopulationGradient(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(f.pop->gradient(f.U));
}
BENCHMARK(BM_PopulationGradient)->Arg(20)->Arg(50);

static void BM_EmpiricalGradient(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(f.emp->gradient(f.U));
}
BENCHMARK(BM_EmpiricalGradient)->Arg(20)->Arg(50);

static void BM_QuadNetGradient(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(f.nn->gradient(f.U));
}
BENCHMARK(BM_QuadNetGradient)->Arg(20)->Arg(50);

static void BM_PopulationHvp(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(f.pop->hvp(f.U, f.Z));
}
BENCHMARK(BM_PopulationHvp)->Arg(20)->Arg(50);

static void BM_EmpiricalHvp(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(f.emp->hvp(f.U, f.Z));
}
BENCHMARK(BM_EmpiricalHvp)->Arg(20)->Arg(50);

static void BM_OpNorm(benchmark::State& state) {
  Rng rng(2);
  const Matrix U = rng.gaussian(state.range(0), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(op_norm(U));
}
BENCHMARK(BM_OpNorm)->Arg(20)->Arg(200);
