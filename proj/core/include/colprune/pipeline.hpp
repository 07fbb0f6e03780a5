#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "colprune/objectives.hpp"
#include "colprune/sensing.hpp"
#include "colprune/solver.hpp"
#include "colprune/types.hpp"

namespace colprune {

/// Absolute constants in the parameter formulas. c_lambda and c_epsilon were
/// raised from 0.1 to 0.25 and lowered to 0.01 after a tuning pass at
/// d = k = 20, r = 3: with 0.1 / 0.1 training stops before the surviving
/// columns have separated (pairwise cosines around 0.3).
struct Constants {
  double c_beta = 0.05;
  double c_lambda = 0.25;
  double c_gamma = 0.1;
  double c_epsilon = 0.01;
};

/// beta = c_b s^2 / r, lambda = c_l s^3 / sqrt(k r),
/// gamma = c_g s^3 / (sqrt(k) r^{5/2}), epsilon = c_e s^{7/2} / (sqrt(k) r^{5/2}),
/// with s = sigma_r_star.
RegParams default_params(double sigma_r_star, Index r, Index k, const Constants& c = {});

enum class ProblemMode { population, empirical, quadratic_network };

const char* to_string(ProblemMode mode);
ProblemMode parse_problem_mode(const std::string& name);

struct ProblemConfig {
  ProblemMode mode = ProblemMode::population;
  Index d = 20;
  Index k = 20;
  Index r = 3;
  double sigma_r_star = 0.5;
  double noise_sigma = 0.0;
  Index n = 4000;  // measurements (empirical and quadratic-network modes)
  GaussianScale sensing_scale = GaussianScale::unit;
  /// Quadratic network: keep the -(||U||^2 - fro_star)^2 correction.
  bool nn_correction = true;
  /// Quadratic network: estimate ||U*||_F^2 from mean(y) instead of using the truth.
  bool nn_estimate_fro = true;
};

/// A concrete instance: ground truth plus measurements when needed.
struct Problem {
  GroundTruth star;
  std::shared_ptr<const SensingSet> sensing;  // null in population mode
  double fro_star = 0.0;                      // quadratic-network mode
  ProblemConfig config;
};

/// Draws the ground truth and then the measurements from `rng`.
Problem make_problem(const ProblemConfig& config, Rng& rng);

/// Unregularized loss of the problem (the fine-tuning objective).
ObjectivePtr base_objective(const Problem& problem);

struct PruneResult {
  Matrix U;                    // kept columns, original order
  std::vector<Index> kept;
  std::vector<Index> pruned;
  double threshold = 0.0;      // 2 sqrt(beta)
};

/// Keeps exactly the columns with norm strictly above 2 sqrt(beta).
PruneResult greedy_prune(const Matrix& U, double beta);

struct FineTuneConfig {
  long iters = 3000;
  /// 0 means 0.1 / sigma_1^2.
  double step_size = 0.0;
  int max_retries = 5;
  long divergence_window = 50;
  /// Stop early once the gradient norm falls below this (0 disables).
  double grad_tol = 0.0;
};

struct FineTuneResult {
  Matrix U;
  std::vector<double> gram_trace;  // gram error at every iterate, including the start
  std::vector<double> loss_trace;
  double step_size = 0.0;
  int retries = 0;
  long iterations = 0;
};

/// Plain gradient descent on the unregularized loss. A DivergenceError halves
/// the step and restarts from U_prune, at most max_retries times.
FineTuneResult fine_tune(const Matrix& U_prune, const Objective& loss, const GroundTruth& star,
                         const FineTuneConfig& config);

/// Training defaults: unperturbed GD at step 0.08 for at most 300000 iterations.
GdConfig default_train_config();

struct PipelineConfig {
  ProblemConfig problem;
  Constants constants;
  /// Replaces the derived lambda (ablations and grid sweeps).
  std::optional<double> lambda_override;
  /// Training init entries are N(0, (init_scale / sqrt(d))^2).
  double init_scale = 0.1;
  /// Regularized training; grad_tol defaults to epsilon when left at 0.
  GdConfig train = default_train_config();
  /// Negative-curvature escapes attempted when certification fails.
  int max_escape_rounds = 10;
  EigenOptions eigen;
  FineTuneConfig fine_tune;
  std::uint64_t seed = 1;
};

struct PhaseSeconds {
  double train = 0.0;
  double certify = 0.0;
  double prune = 0.0;
  double fine_tune = 0.0;
};

struct PipelineReport {
  PipelineConfig config;
  RegParams params;
  bool params_in_regime = false;

  std::vector<GdTraceRow> train_trace;
  long train_iterations = 0;
  int escape_rounds = 0;
  SospReport sosp;

  Vector column_norms;  // after training
  std::vector<Index> kept;
  std::vector<Index> pruned;
  Index surviving_columns = 0;
  double prune_threshold = 0.0;

  double gram_error_before_prune = 0.0;
  double gram_error_after_prune = 0.0;
  double gram_error_after_finetune = 0.0;
  /// sum over pruned columns of ||U e_i||^2 and ||U_prune U_prune^T - U U^T||_F.
  double pruned_mass = 0.0;
  double prune_perturbation = 0.0;
  bool prune_identity_ok = false;
  double max_survivor_cosine = 0.0;

  FineTuneResult fine_tune;
  Matrix U_train;
  Matrix U_final;
  PhaseSeconds seconds;
};

/// Train, certify, prune, fine-tune. Phase failures surface as PipelineError
/// tagged with the phase name.
PipelineReport run_pipeline(const PipelineConfig& config);
PipelineReport run_pipeline(const PipelineConfig& config, const Problem& problem);

/// Runs the pipeline once per lambda on the same instance.
std::vector<PipelineReport> lambda_sweep(const PipelineConfig& config, const std::vector<double>& lambdas);

}  // namespace colprune
