#include <cmath>

#include <gtest/gtest.h>

#include <colprune/errors.hpp>
#include <colprune/linalg.hpp>
#include <colprune/pipeline.hpp>
#include <colprune/report_io.hpp>

using namespace colprune;

TEST(DefaultParams, UnitCase) {
  const Constants c{1.0, 1.0, 1.0, 1.0};
  const RegParams p = default_params(1.0, 1, 1, c);
  EXPECT_DOUBLE_EQ(p.beta, 1.0);
  EXPECT_DOUBLE_EQ(p.lambda, 1.0);
  EXPECT_DOUBLE_EQ(p.gamma, 1.0);
  EXPECT_DOUBLE_EQ(p.epsilon, 1.0);
}

TEST(DefaultParams, BetaArithmetic) {
  Constants c;
  c.c_beta = 1.0;
  EXPECT_NEAR(default_params(0.5, 3, 20, c).beta, 0.25 / 3.0, 1e-15);
  EXPECT_THROW(default_params(0.0, 3, 20), InvalidArgument);
}

TEST(GreedyPrune, ThresholdExample) {
  Matrix U = Matrix::Zero(2, 4);
  U(0, 0) = 3;
  U(1, 1) = 0.1;
  U(0, 2) = 2;
  U(1, 3) = 0.05;
  const PruneResult pr = greedy_prune(U, 0.01);
  EXPECT_DOUBLE_EQ(pr.threshold, 0.2);
  EXPECT_EQ(pr.kept, (std::vector<Index>{0, 2}));
  EXPECT_EQ(pr.pruned, (std::vector<Index>{1, 3}));
  EXPECT_EQ(pr.U.col(1), U.col(2));
}

TEST(GreedyPrune, AllAboveKeepsEverything) {
  const Matrix U = Matrix::Ones(3, 4);
  EXPECT_EQ(greedy_prune(U, 0.01).U, U);
}

TEST(GreedyPrune, BoundaryIsPruned) {
  const double beta = 0.25;
  Matrix U = Matrix::Zero(2, 2);
  U(0, 0) = 2 * std::sqrt(beta);
  U(1, 1) = 1.5;
  const PruneResult pr = greedy_prune(U, beta);
  EXPECT_EQ(pr.kept, (std::vector<Index>{1}));
  EXPECT_EQ(pr.pruned, (std::vector<Index>{0}));
}

TEST(GreedyPrune, PruningIdentityBound) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix U = rng.gaussian(6, 8, 0.3);
    const double beta = 0.1;
    const PruneResult pr = greedy_prune(U, beta);
    double mass = 0;
    for (Index i : pr.pruned) mass += U.col(i).squaredNorm();
    const double dist = pr.U.cols() ? gram_distance(pr.U, U) : (U * U.transpose()).norm();
    EXPECT_LE(dist, mass * (1 + 1e-12) + 1e-15);
  }
}

TEST(FineTune, OptimalStartIsUnchanged) {
  Rng rng(2);
  const GroundTruth star = gen_ground_truth(6, 2, 0.5, rng);
  const ObjectivePtr f = population_loss(star);
  FineTuneConfig cfg;
  cfg.iters = 100;
  const FineTuneResult res = fine_tune(star.factor, *f, star, cfg);
  EXPECT_LE((res.U - star.factor).norm(), 1e-14);
}

TEST(FineTune, NoiselessWarmStartConvergesGeometrically) {
  Rng rng(3);
  const GroundTruth star = gen_ground_truth(10, 2, 0.5, rng);
  const auto sensing = std::make_shared<const SensingSet>(measure(star, gen_gaussian_sensing(300, 10, rng), 0.0, rng));
  const ObjectivePtr f = empirical_loss(sensing);
  Matrix U0 = star.factor + rng.gaussian(10, 2, 0.02);
  ASSERT_LE(gram_error(U0, star), 0.125);
  FineTuneConfig cfg;
  cfg.iters = 2000;
  const FineTuneResult res = fine_tune(U0, *f, star, cfg);
  const auto& tr = res.gram_trace;
  // fitted rate over the stretch above the numerical floor
  std::size_t end = 0;
  while (end + 1 < tr.size() && tr[end + 1] > 1e-12) ++end;
  ASSERT_GT(end, 10u);
  const double rho = std::pow(tr[end] / tr[0], 1.0 / static_cast<double>(end));
  EXPECT_LT(rho, 1.0);
  for (std::size_t s = 0; s + 100 <= end; s += 100) EXPECT_LE(tr[s + 100], tr[s] * std::pow(rho, 100) * 10);
  EXPECT_LE(tr.back(), 1e-10);
}

TEST(FineTune, NoisyRunPlateaus) {
  Rng rng(4);
  const GroundTruth star = gen_ground_truth(10, 2, 0.5, rng);
  const auto sensing = std::make_shared<const SensingSet>(measure(star, gen_gaussian_sensing(300, 10, rng), 0.1, rng));
  const ObjectivePtr f = empirical_loss(sensing);
  FineTuneConfig cfg;
  cfg.iters = 3000;
  const FineTuneResult res = fine_tune(star.factor + rng.gaussian(10, 2, 0.02), *f, star, cfg);
  const double floor = res.gram_trace.back();
  EXPECT_GT(floor, 1e-4);
  EXPECT_NEAR(res.gram_trace[res.gram_trace.size() - 500], floor, 0.01 * floor);
}

TEST(FineTune, DivergenceRetriesThenFails) {
  Rng rng(5);
  const GroundTruth star = gen_ground_truth(5, 2, 0.5, rng);
  const ObjectivePtr f = population_loss(star);
  FineTuneConfig cfg;
  cfg.iters = 200;
  cfg.step_size = 50.0;
  cfg.max_retries = 1;
  EXPECT_THROW(fine_tune(rng.gaussian(5, 2, 2.0), *f, star, cfg), DivergenceError);
  EXPECT_THROW(fine_tune(Matrix(5, 0), *f, star, cfg), InvalidArgument);
}

namespace {

PipelineConfig small_population(std::uint64_t seed) {
  PipelineConfig c;
  c.problem.d = 10;
  c.problem.k = 10;
  c.problem.r = 2;
  c.fine_tune.iters = 500;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Pipeline, DeterministicGivenSeed) {
  const PipelineReport a = run_pipeline(small_population(7));
  const PipelineReport b = run_pipeline(small_population(7));
  EXPECT_TRUE(a.U_final == b.U_final);
  EXPECT_EQ(a.kept, b.kept);
  EXPECT_EQ(a.train_iterations, b.train_iterations);
  nlohmann::json ja = to_json(a), jb = to_json(b);
  ja.erase("seconds");
  jb.erase("seconds");
  EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(Pipeline, SurvivorCountMatchesStrictThreshold) {
  const PipelineReport rep = run_pipeline(small_population(3));
  Index above = 0;
  for (Index i = 0; i < rep.column_norms.size(); ++i) above += rep.column_norms(i) > rep.prune_threshold ? 1 : 0;
  EXPECT_EQ(rep.surviving_columns, above);
  EXPECT_EQ(static_cast<Index>(rep.kept.size()), above);
  EXPECT_TRUE(rep.prune_identity_ok);
}

TEST(Pipeline, PopulationDefaultRecoversRank) {
  PipelineConfig c;
  c.seed = 1;
  c.fine_tune.iters = 500;
  const PipelineReport rep = run_pipeline(c);
  EXPECT_TRUE(rep.sosp.certified());
  EXPECT_EQ(rep.surviving_columns, 3);
  EXPECT_LE(rep.gram_error_after_prune, 0.125);
  EXPECT_LE(rep.max_survivor_cosine, 0.15);
}

TEST(Pipeline, EmpiricalNoiselessReachesTinyError) {
  PipelineConfig c;
  c.problem.mode = ProblemMode::empirical;
  c.problem.n = 100;
  c.fine_tune.iters = 5000;
  c.seed = 1;
  const PipelineReport rep = run_pipeline(c);
  EXPECT_EQ(rep.surviving_columns, 3);
  EXPECT_LE(rep.gram_error_after_finetune, 1e-5);
}

TEST(Pipeline, HeavyRegularizationFailsLoudlyAtPrune) {
  PipelineConfig c = small_population(2);
  c.lambda_override = 0.8;  // origin becomes a stable minimum, still a stable step
  try {
    run_pipeline(c);
    FAIL() << "expected a prune-phase error";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.phase(), "prune");
  }
}

TEST(Pipeline, LambdaZeroAblationRuns) {
  PipelineConfig c = small_population(4);
  c.lambda_override = 0.0;
  c.train.max_iters = 3000;
  const PipelineReport rep = run_pipeline(c);
  EXPECT_GE(rep.surviving_columns, 1);
}

TEST(Pipeline, BadConfigIsSetupError) {
  PipelineConfig c = small_population(1);
  c.problem.r = 0;
  try {
    run_pipeline(c);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.phase(), "setup");
  }
}

TEST(ProblemModes, ParseRoundTrip) {
  for (ProblemMode m : {ProblemMode::population, ProblemMode::empirical, ProblemMode::quadratic_network}) {
    EXPECT_EQ(parse_problem_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_problem_mode("bogus"), InvalidArgument);
}
