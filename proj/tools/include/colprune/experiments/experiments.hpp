#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <colprune/pipeline.hpp>
#include <colprune/solver.hpp>

#include "colprune/experiments/artifacts.hpp"
#include "colprune/experiments/config.hpp"

namespace colprune::experiments {

// ---------------------------------------------------------------------------
// Small statistics helpers shared by the commands and the acceptance suite.

double median(std::vector<double> values);
/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
/// True when trace[i + window] <= trace[i] / factor for every i (stepping by
/// window) until the trace first drops below `floor`, and it does drop below.
bool decays_by_factor(const std::vector<double>& trace, double factor, long window, double floor);
/// 1 / (k^3 d log(kd)): the small-initialization scale with the unspecified
/// absolute constant set to 1.
double small_init_bound(Index d, Index k);

/// Options common to every command.
struct RunOptions {
  unsigned threads = 1;
  bool plots = false;
};

// ---------------------------------------------------------------------------
// implicit-reg: unregularized GD from small initialization versus the
// regularized pipeline on the same ground truth.

struct ImplicitRegSettings {
  Index d = 500;
  Index k = 500;
  Index r = 4;
  double sigma_r_star = 0.5;
  /// Entry scale of the unregularized init; 0 selects small_init_bound(d, k).
  double alpha0 = 0.0;
  double step_size = 0.08;
  long max_iters = 200000;
  double grad_tol = 1e-8;
  double census_threshold = 0.99;
  bool run_regularized = true;
  std::uint64_t seed = 1;

  /// Keys: implicit.preset (figure | desk), implicit.d, implicit.k, implicit.r,
  /// implicit.sigma_r_star, implicit.alpha0, implicit.step_size,
  /// implicit.max_iters, implicit.grad_tol, implicit.census_threshold,
  /// implicit.regularized, seed.
  static ImplicitRegSettings from_config(const KeyValueConfig& cfg);
};

struct ImplicitRegResult {
  ImplicitRegSettings settings;
  double alpha0 = 0.0;
  double alpha0_bound = 0.0;
  GdResult unregularized;
  double unregularized_gram_error = 0.0;
  Census unregularized_census;
  std::vector<double> grid;
  std::vector<double> unregularized_fraction;
  bool has_regularized = false;
  PipelineReport regularized;
  Census regularized_census;
  std::vector<double> regularized_fraction;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

ImplicitRegResult run_implicit_reg(const ImplicitRegSettings& s, const RunOptions& opts = {});
void write_artifacts(const ImplicitRegResult& r, const ArtifactDir& dir, bool plots);

// ---------------------------------------------------------------------------
// pipeline-compare: vanilla GD against the pipeline at equal iteration budget,
// plus a label-noise sweep over the number of measurements.

struct PipelineCompareSettings {
  Index d = 20;
  Index k = 20;
  Index r = 3;
  double sigma_r_star = 0.5;
  Index n = 100;
  double noise_sigma = 0.0;
  int seeds = 5;
  std::uint64_t seed = 1;  // trial i uses seed + i
  /// c_lambda candidates; each trial keeps the one with the lowest loss on a
  /// held-out measurement set.
  std::vector<double> c_lambda_grid{0.1, 0.25, 0.5};
  Index validation_n = 100;
  long train_max_iters = 100000;
  long fine_tune_iters = 5000;
  long trace_stride = 100;
  bool compare = true;
  bool noise_sweep = true;
  double sweep_sigma = 0.1;
  std::vector<double> sweep_n{250, 1000, 4000};
  int sweep_seeds = 5;

  /// Keys: compare.d, compare.k, compare.r, compare.sigma_r_star, compare.n,
  /// compare.noise_sigma, compare.seeds, compare.c_lambda_grid,
  /// compare.validation_n, compare.train_max_iters, compare.fine_tune_iters,
  /// compare.trace_stride, compare.enabled, sweep.enabled, sweep.sigma,
  /// sweep.n, sweep.seeds, seed.
  static PipelineCompareSettings from_config(const KeyValueConfig& cfg);
};

struct CompareTrial {
  std::uint64_t seed = 0;
  double chosen_c_lambda = 0.0;
  std::vector<double> validation_losses;  // per grid entry, NaN when the run failed
  long budget = 0;
  long prune_iter = 0;
  Index surviving_columns = 0;
  double pipeline_floor = 0.0;
  double vanilla_floor = 0.0;
  /// (iteration, gram error) samples.
  std::vector<std::pair<long, double>> pipeline_curve;
  std::vector<std::pair<long, double>> vanilla_curve;
  std::string error;
};

struct SweepPoint {
  Index n = 0;
  std::vector<double> floors;  // per seed, NaN for failed runs
  std::vector<Index> survivors;
  double median_floor = 0.0;
};

struct PipelineCompareResult {
  PipelineCompareSettings settings;
  std::vector<CompareTrial> trials;
  double median_pipeline_floor = 0.0;
  double median_vanilla_floor = 0.0;
  std::vector<SweepPoint> sweep;
  double sweep_slope = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

PipelineCompareResult run_pipeline_compare(const PipelineCompareSettings& s, const RunOptions& opts = {});
void write_artifacts(const PipelineCompareResult& r, const ArtifactDir& dir, bool plots);

// ---------------------------------------------------------------------------
// flow-diagnostics: rank-one gradient flow from small initialization.

struct FlowDiagnosticsSettings {
  Index d = 50;
  Index k = 50;
  double alpha0 = 1e-4;
  /// Integrate until the true gradient norm falls below this (or t_end).
  double grad_tol = 1e-8;
  double t_end = 400.0;
  double field_scale = 0.25;
  double rel_tol = 1e-10;
  double snapshot_dt = 0.05;
  /// Slack allowed on successive ||E(t)||_F values.
  double monotone_slack = 1e-8;
  double law_tolerance = 0.1;
  std::uint64_t seed = 1;

  /// Keys: flow.d, flow.k, flow.alpha0, flow.grad_tol, flow.t_end,
  /// flow.field_scale, flow.rel_tol, flow.snapshot_dt, flow.monotone_slack,
  /// flow.law_tolerance, seed.
  static FlowDiagnosticsSettings from_config(const KeyValueConfig& cfg);
};

struct FlowDiagnosticsResult {
  FlowDiagnosticsSettings settings;
  GroundTruth star;
  InitStats init;
  Vector r0;  // r(0) = U(0)^T u*
  FlowTrace trace;
  double max_noise_increase = 0.0;  // largest ||E(t_{j+1})|| - ||E(t_j)||
  bool noise_monotone = false;
  Vector column_law_ratio;  // ||U e_i|| / (|<r(0), e_i>| / ||r(0)||)
  double column_law_max_deviation = 0.0;
  bool column_law_ok = false;
  double final_grad_norm = 0.0;
  double final_gram_error = 0.0;
  double final_signal_norm = 0.0;
  double envelope_eta = 0.0;
  double max_envelope_violation = 0.0;  // max of ||r(t)||^2 - envelope(t)
  /// max of ||r(t)||^2 - sigmoid(2t + logit(||r(0)||^2)), the bound obtained by
  /// integrating d||r||^2/dt <= 2||r||^2 (1 - ||r||^2) directly.
  double max_logistic_violation = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

FlowDiagnosticsResult run_flow_diagnostics(const FlowDiagnosticsSettings& s, const RunOptions& opts = {});
void write_artifacts(const FlowDiagnosticsResult& r, const ArtifactDir& dir, bool plots);

// ---------------------------------------------------------------------------
// quadratic-nn: the pipeline on a one-hidden-layer network with z^2
// activation (rank-one sensing).

struct QuadraticNnSettings {
  Index d = 20;
  Index k = 10;
  Index r = 2;
  double sigma_r_star = 0.5;
  /// 0 selects 30 d r.
  Index n = 0;
  double noise_sigma = 0.0;
  double step_size = 0.04;
  int seeds = 5;
  std::uint64_t seed = 1;
  bool ablation = true;
  double fro_se_bound = 3.0;

  /// Keys: nn.d, nn.k, nn.r, nn.sigma_r_star, nn.n, nn.noise_sigma,
  /// nn.step_size, nn.seeds, nn.ablation, nn.fro_se_bound, seed.
  static QuadraticNnSettings from_config(const KeyValueConfig& cfg);
  Index measurements() const { return n > 0 ? n : 30 * d * r; }
};

struct NnTrial {
  std::uint64_t seed = 0;
  bool correction = true;
  bool completed = false;
  std::string error;
  Index surviving_columns = 0;
  double gram_error_after_prune = 0.0;
  double gram_error_final = 0.0;
  bool certified = false;
  double fro_estimate = 0.0;
  double fro_truth = 0.0;
  double fro_standard_error = 0.0;
  bool success(Index r) const { return completed && surviving_columns == r && gram_error_final <= 0.125; }
};

struct QuadraticNnResult {
  QuadraticNnSettings settings;
  std::vector<NnTrial> trials;    // with correction
  std::vector<NnTrial> ablation;  // without correction
  int successes = 0;
  int ablation_successes = 0;
  bool fro_estimates_ok = false;  // every |estimate - truth| <= bound * SE
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

QuadraticNnResult run_quadratic_nn(const QuadraticNnSettings& s, const RunOptions& opts = {});
void write_artifacts(const QuadraticNnResult& r, const ArtifactDir& dir, bool plots);

// ---------------------------------------------------------------------------
// rip-report: Monte-Carlo RIP lower bounds against the number of measurements.

struct RipReportSettings {
  Index d = 20;
  Index k = 20;
  Index r = 3;
  double sigma_r_star = 0.5;
  /// Probe rank; 0 selects 2k.
  Index rank_bound = 0;
  std::vector<double> n_values{100, 250, 1000, 4000};
  Index trials = 200;
  std::uint64_t seed = 1;

  /// Keys: rip.d, rip.k, rip.r, rip.sigma_r_star, rip.rank_bound, rip.n,
  /// rip.trials, seed.
  static RipReportSettings from_config(const KeyValueConfig& cfg);
};

struct RipReportResult {
  RipReportSettings settings;
  std::vector<Index> n_values;
  std::vector<double> delta_hat;
  double requirement = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

RipReportResult run_rip_report(const RipReportSettings& s, const RunOptions& opts = {});
void write_artifacts(const RipReportResult& r, const ArtifactDir& dir, bool plots);

}  // namespace colprune::experiments
