// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance and
// budget is pinned below; nothing here reads a config file.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <colprune/eigensolver.hpp>
#include <colprune/errors.hpp>
#include <colprune/linalg.hpp>
#include <colprune/objectives.hpp>
#include <colprune/pipeline.hpp>
#include <colprune/rng.hpp>
#include <colprune/sensing.hpp>

#include "colprune/experiments/experiments.hpp"
#include "colprune/experiments/verify.hpp"

#include "../oracles.hpp"

using namespace colprune;
using namespace colprune::experiments;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- 1: calculus -------------------------------------------------------------

constexpr int kFdInstances = 20;
constexpr double kFdGradTol = 1e-6;
constexpr double kFdHessTol = 1e-5;
constexpr double kRegGradIdentityTol = 1e-13;

Outcome calculus() {
  double worst_grad = 0, worst_hess = 0, worst_identity = 0;
  for (int i = 0; i < kFdInstances; ++i) {
    Rng rng(1000 + static_cast<std::uint64_t>(i));
    const Index d = 3 + static_cast<Index>(rng.uniform() * 8);  // 3..10
    const Index k = 2 + static_cast<Index>(rng.uniform() * 5);  // 2..6
    const Index r = 1 + static_cast<Index>(rng.uniform() * std::min<Index>(3, d));
    const GroundTruth star = gen_ground_truth(d, r, r == 1 ? 1.0 : 0.5, rng);
    const auto dense = std::make_shared<const SensingSet>(measure(star, gen_gaussian_sensing(50, d, rng), 0.1, rng));
    const auto quad = std::make_shared<const SensingSet>(measure(star, gen_rank_one_sensing(80, d, rng), 0.1, rng));
    const Matrix U = rng.gaussian(d, k, 0.5);
    Matrix Z = rng.gaussian(d, k);
    Z /= Z.norm();
    const double beta = 0.05 + rng.uniform();
    RegParams none;
    none.lambda = 0;

    struct Named {
      const char* name;
      std::function<double(const Matrix&)> value;
      std::function<Matrix(const Matrix&)> grad;
      std::function<double(const Matrix&, const Matrix&)> quad;
    };
    const ObjectivePtr pop = population_loss(star);
    const ObjectivePtr emp = empirical_loss(dense);
    const ObjectivePtr nn = nn_objective(quad, star.factor.squaredNorm(), none);
    const std::vector<Named> cases{
        {"L_pop", oracle::value_of(*pop), oracle::gradient_of(*pop),
         [&](const Matrix& A, const Matrix& B) { return pop->hess_quadform(A, B); }},
        {"L_emp", oracle::value_of(*emp), oracle::gradient_of(*emp),
         [&](const Matrix& A, const Matrix& B) { return emp->hess_quadform(A, B); }},
        {"R_beta", [&](const Matrix& A) { return reg_value(A, beta); },
         [&](const Matrix& A) { return reg_grad(A, beta); },
         [&](const Matrix& A, const Matrix& B) { return reg_hess_quadform(A, beta, B); }},
        {"f_NN", oracle::value_of(*nn), oracle::gradient_of(*nn),
         [&](const Matrix& A, const Matrix& B) { return nn->hess_quadform(A, B); }},
    };
    for (const Named& c : cases) {
      worst_grad = std::max(worst_grad, oracle::rel_error(c.grad(U), oracle::fd_gradient(c.value, U)));
      const double q = c.quad(U, Z);
      const double fd = oracle::fd_second_directional(c.value, U, Z);
      worst_hess = std::max(worst_hess, std::abs(q - fd) / std::max(1.0, std::abs(q)));
    }
    const Matrix direct = U * d_diag(U, beta).asDiagonal();
    worst_identity = std::max(worst_identity, oracle::rel_error(reg_grad(U, beta), direct));
  }
  Outcome o;
  o.pass = worst_grad <= kFdGradTol && worst_hess <= kFdHessTol && worst_identity <= kRegGradIdentityTol;
  o.detail = "max grad rel err " + fmt("%.2e", worst_grad) + ", max quadform rel err " + fmt("%.2e", worst_hess) +
             ", max |grad R - U D| rel " + fmt("%.2e", worst_identity);
  return o;
}

// --- 2: boundedness ----------------------------------------------------------

Outcome boundedness() {
  VerifySettings s;
  s.bound_seeds = 50;
  s.bound_steps = 10000;
  s.bound_d = 20;
  s.bound_k = 20;
  s.bound_r = 3;
  s.bound_cap = 3.0;
  const SuiteResult res = verify_boundedness(s, 1);
  Outcome o;
  o.pass = res.passed;
  o.detail = "max op norm " + fmt("%.15f", res.detail.value("max_op_norm", NAN)) + " over " +
             std::to_string(s.bound_seeds) + " seeds x " + std::to_string(s.bound_steps) + " steps, violations " +
             std::to_string(res.detail.value("violations", -1));
  return o;
}

// --- 3 and 4: rank-one gradient flow -------------------------------------------

constexpr double kFlowAlpha0 = 1e-4;
constexpr double kFlowSlack = 1e-8;
constexpr double kLawTolerance = 0.1;
constexpr double kFlowGradTol = 1e-8;

FlowDiagnosticsSettings flow_settings(double t_end) {
  FlowDiagnosticsSettings s;
  s.d = 50;
  s.k = 50;
  s.alpha0 = kFlowAlpha0;
  s.grad_tol = kFlowGradTol;
  s.t_end = t_end;
  s.snapshot_dt = 0.5;
  s.monotone_slack = kFlowSlack;
  s.law_tolerance = kLawTolerance;
  return s;
}

Outcome noise_monotone() {
  const FlowDiagnosticsResult r = run_flow_diagnostics(flow_settings(1e4));
  Outcome o;
  o.pass = r.noise_monotone && r.max_noise_increase <= kFlowSlack;
  o.detail = "max ||E|| increase " + fmt("%.3e", r.max_noise_increase) + " over " +
             std::to_string(r.trace.snapshots.size()) + " snapshots to t = " +
             fmt("%.0f", r.trace.snapshots.back().t);
  return o;
}

Outcome column_law() {
  const FlowDiagnosticsResult r = run_flow_diagnostics(flow_settings(1e5));
  Outcome o;
  const bool converged = r.final_grad_norm < kFlowGradTol;
  o.pass = converged && r.column_law_max_deviation <= kLawTolerance;
  o.detail = "max |ratio - 1| " + fmt("%.4f", r.column_law_max_deviation) + ", final grad " +
             fmt("%.2e", r.final_grad_norm) + " at t = " + fmt("%.0f", r.trace.snapshots.back().t) +
             (converged ? "" : " (gradient tolerance not reached)");
  return o;
}

// --- 5: implicit regularization -------------------------------------------------

constexpr Index kCensusFloor = 10;

Outcome implicit_reg() {
  const ImplicitRegSettings s = ImplicitRegSettings::from_config(KeyValueConfig::parse("implicit.preset = desk\n"));
  const ImplicitRegResult r = run_implicit_reg(s);
  Outcome o;
  o.pass = r.unregularized_census.count >= kCensusFloor && r.has_regularized &&
           r.regularized.surviving_columns == 1;
  o.detail = "unregularized census " + std::to_string(r.unregularized_census.count) + " (floor " +
             std::to_string(kCensusFloor) + ", alpha0 " + fmt("%.2e", r.alpha0) + ", " +
             std::to_string(r.unregularized.iterations) + " iters), regularized survivors " +
             std::to_string(r.regularized.surviving_columns);
  return o;
}

// --- 6 and 10: pipeline at desk scale ---------------------------------------------

constexpr int kPipelineSeeds = 10;
constexpr int kPipelineMinHits = 9;
constexpr double kPruneGramTol = 0.125;
constexpr double kMaxCosine = 0.15;

struct DeskRun {
  ProblemMode mode = ProblemMode::population;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  PipelineReport rep;
};

std::vector<DeskRun> desk_runs(long fine_tune_iters) {
  std::vector<DeskRun> out;
  for (ProblemMode mode : {ProblemMode::population, ProblemMode::empirical}) {
    for (int i = 0; i < kPipelineSeeds; ++i) {
      DeskRun run;
      run.mode = mode;
      run.seed = static_cast<std::uint64_t>(i + 1);
      PipelineConfig c;
      c.problem.mode = mode;
      c.problem.d = 20;
      c.problem.k = 20;
      c.problem.r = 3;
      c.problem.sigma_r_star = 0.5;
      c.problem.n = 4000;
      c.fine_tune.iters = fine_tune_iters;
      c.seed = run.seed;
      try {
        run.rep = run_pipeline(c);
        run.ok = true;
      } catch (const Error& e) {
        run.error = e.what();
      }
      out.push_back(std::move(run));
    }
  }
  return out;
}

Outcome pipeline_desk() {
  const std::vector<DeskRun> runs = desk_runs(100);
  Outcome o;
  o.pass = true;
  std::ostringstream detail;
  for (ProblemMode mode : {ProblemMode::population, ProblemMode::empirical}) {
    int hits = 0;
    double worst = 0;
    for (const DeskRun& r : runs) {
      if (r.mode != mode || !r.ok || r.rep.surviving_columns != 3) continue;
      ++hits;
      worst = std::max(worst, r.rep.gram_error_after_prune);
    }
    const bool ok = hits >= kPipelineMinHits && worst <= kPruneGramTol;
    o.pass = o.pass && ok;
    detail << to_string(mode) << ": " << hits << "/" << kPipelineSeeds << " with 3 survivors, worst post-prune "
           << fmt("%.4f", worst) << "; ";
  }
  o.detail = detail.str();
  return o;
}

Outcome orthogonality() {
  const std::vector<DeskRun> runs = desk_runs(100);
  double worst = 0;
  int used = 0;
  for (const DeskRun& r : runs) {
    if (!r.ok) continue;
    ++used;
    worst = std::max(worst, r.rep.max_survivor_cosine);
  }
  Outcome o;
  o.pass = used == 2 * kPipelineSeeds && worst <= kMaxCosine;
  o.detail = "max survivor |cosine| " + fmt("%.4f", worst) + " over " + std::to_string(used) + " runs";
  return o;
}

// --- 7: fine-tuning ----------------------------------------------------------------

constexpr double kDecayFactor = 10.0;
constexpr long kDecayWindow = 200;
constexpr double kDecayFloor = 1e-8;
constexpr double kSlopeLo = -0.65;
constexpr double kSlopeHi = -0.35;

Outcome fine_tuning() {
  // Noiseless: the empirical desk runs (n = 4000, sigma = 0), traced from the
  // pruned warm start.
  int linear = 0, total = 0;
  for (const DeskRun& r : desk_runs(5000)) {
    if (r.mode != ProblemMode::empirical || !r.ok) continue;
    ++total;
    if (decays_by_factor(r.rep.fine_tune.gram_trace, kDecayFactor, kDecayWindow, kDecayFloor)) ++linear;
  }
  PipelineCompareSettings s;
  s.compare = false;
  s.noise_sweep = true;
  s.sweep_sigma = 0.1;
  s.sweep_n = {250, 1000, 4000};
  s.sweep_seeds = 5;
  const PipelineCompareResult res = run_pipeline_compare(s);
  Outcome o;
  o.pass = total == kPipelineSeeds && linear == total && res.sweep_slope >= kSlopeLo && res.sweep_slope <= kSlopeHi;
  std::ostringstream detail;
  detail << "noiseless 10x/200 iters in " << linear << "/" << total << " runs; noisy medians";
  for (const SweepPoint& p : res.sweep) detail << " n=" << p.n << ":" << fmt("%.4g", p.median_floor);
  detail << ", slope " << fmt("%.3f", res.sweep_slope);
  o.detail = detail.str();
  return o;
}

// --- 8: pipeline versus vanilla GD ------------------------------------------------------

constexpr double kFloorRatio = 10.0;

Outcome figure_two() {
  PipelineCompareSettings s;
  s.compare = true;
  s.noise_sweep = false;
  const PipelineCompareResult res = run_pipeline_compare(s);
  Outcome o;
  o.pass = kFloorRatio * res.median_pipeline_floor <= res.median_vanilla_floor;
  o.detail = "median floors: pipeline " + fmt("%.3e", res.median_pipeline_floor) + ", vanilla " +
             fmt("%.3e", res.median_vanilla_floor);
  return o;
}

// --- 9: eigensolver against a dense finite-difference Hessian --------------------------

constexpr int kEigInstances = 10;
constexpr double kEigTol = 1e-6;

Outcome eigen_oracle() {
  double worst = 0;
  for (int i = 0; i < kEigInstances; ++i) {
    Rng rng(5000 + static_cast<std::uint64_t>(i));
    const Index d = 8 + i;
    const Index k = std::min<Index>(200 / d, 4 + i);
    const GroundTruth star = gen_ground_truth(d, 2, 0.5, rng);
    RegParams reg;
    reg.beta = 0.05;
    reg.lambda = 0.05;
    ObjectivePtr base = population_loss(star);
    if (i % 2 == 1) {
      base = empirical_loss(std::make_shared<const SensingSet>(measure(star, gen_gaussian_sensing(200, d, rng), 0.05, rng)));
    }
    const ObjectivePtr f = regularized(base, reg);
    const Matrix U = rng.gaussian(d, k, 0.4);
    EigenOptions opts;
    opts.force_iterative = true;
    const double lanczos = hessian_min_eigenpair(*f, U, opts).value;
    const double dense = oracle::dense_min_eig(oracle::fd_hessian(oracle::gradient_of(*f), U));
    worst = std::max(worst, std::abs(lanczos - dense));
  }
  Outcome o;
  o.pass = worst <= kEigTol;
  o.detail = "max |lambda_min(Lanczos) - lambda_min(dense FD)| " + fmt("%.2e", worst);
  return o;
}

// --- 11: quadratic network ----------------------------------------------------------

constexpr int kNnMinSuccesses = 4;

Outcome quadratic_nn() {
  QuadraticNnSettings s;
  s.ablation = false;
  const QuadraticNnResult r = run_quadratic_nn(s);
  std::ostringstream detail;
  detail << r.successes << "/" << s.seeds << " seeds with 2 neurons and gram <= 0.125;";
  for (const NnTrial& t : r.trials) {
    detail << " [seed " << t.seed << ": ";
    if (t.completed) {
      detail << t.surviving_columns << " neurons, gram " << fmt("%.3g", t.gram_error_final);
    } else {
      detail << "failed: " << t.error.substr(0, 60);
    }
    detail << "]";
  }
  Outcome o;
  o.pass = r.successes >= kNnMinSuccesses;
  o.detail = detail.str();
  return o;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {1, "calculus", 10, calculus},
      {2, "boundedness", 120, boundedness},
      {3, "noise-monotonicity", 30, noise_monotone},
      {4, "column-law", 60, column_law},
      {5, "implicit-regularization", 300, implicit_reg},
      {6, "pipeline-desk", 600, pipeline_desk},
      {7, "fine-tuning", 600, fine_tuning},
      {8, "pipeline-vs-vanilla", 300, figure_two},
      {9, "eigen-oracle", 60, eigen_oracle},
      {10, "near-orthogonality", 600, orthogonality},
      {11, "quadratic-network", 300, quadratic_nn},
  };
  return list;
}

bool run_one(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_budget = secs < c.budget_seconds;
  const bool pass = o.pass && in_budget;
  std::printf("criterion %2d %-24s %s  %7.1fs/%4.0fs  %s%s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
              c.budget_seconds, o.detail.c_str(), in_budget ? "" : " (over runtime budget)");
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  enable_flush_to_zero();
  CLI::App app{"colprune acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11); default runs all")->check(CLI::Range(0, 11));
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (const Criterion& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    all = run_one(c) && all;
  }
  return all ? 0 : 1;
}
