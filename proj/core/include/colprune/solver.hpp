#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "colprune/eigensolver.hpp"
#include "colprune/objectives.hpp"
#include "colprune/rng.hpp"
#include "colprune/types.hpp"

namespace colprune {

// ---------------------------------------------------------------------------
// Perturbed gradient descent U <- U - alpha (grad f(U) + P_t).

enum class PerturbationKind { none, uniform_ball, gaussian };
enum class PerturbTrigger { always, on_small_gradient };

const char* to_string(PerturbationKind kind);
const char* to_string(PerturbTrigger trigger);
PerturbationKind parse_perturbation(const std::string& name);
PerturbTrigger parse_trigger(const std::string& name);

struct GdConfig {
  double step_size = 0.03;
  long max_iters = 10000;

  PerturbationKind perturbation = PerturbationKind::none;
  /// Frobenius radius for uniform_ball, entry standard deviation for gaussian.
  double perturb_radius = 1.0;
  PerturbTrigger trigger = PerturbTrigger::on_small_gradient;
  /// Gradient norm below which on_small_gradient perturbs.
  double perturb_threshold = 1e-3;
  /// Minimum iterations between two perturbations (on_small_gradient).
  long perturb_interval = 200;
  /// After a perturbation, stop if f has not dropped by this much within
  /// perturb_interval iterations (no escape: the point is treated as a
  /// second-order stationary candidate). 0 disables the test.
  double escape_decrease = 0.0;
  /// Clip every perturbation to ||P||_op <= 1.
  bool project_perturbation = true;

  /// Stop once ||grad f|| <= grad_tol outside an escape window. 0 disables.
  double grad_tol = 0.0;
  /// Abort when ||U_t||_op exceeds this bound (checked every iteration).
  std::optional<double> op_norm_guard;
  /// Abort after this many consecutive objective increases. 0 disables.
  long divergence_window = 0;

  /// Record a trace row every `trace_stride` iterations (0 = never), plus the
  /// first and last iterate.
  long trace_stride = 100;
};

struct GdTraceRow {
  long iter = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double op_norm = 0.0;
  double min_col_norm = 0.0;
  double max_col_norm = 0.0;
  /// ||U U^T - U* U*^T||_F when a reference was supplied, NaN otherwise.
  double gram_error = std::numeric_limits<double>::quiet_NaN();
  bool perturbed = false;
};

enum class StopReason { max_iters, grad_tol, no_escape, callback };

const char* to_string(StopReason reason);

struct GdResult {
  Matrix U;
  std::vector<GdTraceRow> trace;
  long iterations = 0;
  long perturbations = 0;
  StopReason reason = StopReason::max_iters;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  /// Largest ||U_t||_op seen; only tracked while the guard is armed.
  double max_op_norm = 0.0;
};

/// Per-iteration observer; returning false stops the run (StopReason::callback).
using IterationCallback = std::function<bool(long iter, const Matrix& U, double loss, double grad_norm)>;

/// Runs perturbed gradient descent. Throws DivergenceError on non-finite
/// iterates or a sustained increase, GuardViolation when the armed
/// operator-norm guard trips. Without perturbation the run is deterministic
/// and does not touch `rng`. With a `reference`, trace rows carry the gram error.
GdResult perturbed_gd(const Objective& f, const Matrix& U0, const GdConfig& config, Rng& rng,
                      const IterationCallback& callback = {}, const GroundTruth* reference = nullptr);

/// Draws one perturbation according to the configured kind and projection.
Matrix draw_perturbation(Index d, Index k, const GdConfig& config, Rng& rng);

// ---------------------------------------------------------------------------
// Approximate second-order stationarity.

enum class Certainty { pass, fail, unknown };

const char* to_string(Certainty c);

struct SospReport {
  double grad_norm = 0.0;
  double lambda_min = 0.0;
  double lambda_min_residual = 0.0;
  double residual_tolerance = 0.0;
  bool gradient_ok = false;         // grad_norm <= epsilon
  Certainty curvature = Certainty::unknown;  // lambda_min >= -gamma with a converged eigenpair
  Index hvp_products = 0;
  bool dense = false;
  Vector direction;                 // eigenvector of lambda_min, vec(U) layout

  bool certified() const { return gradient_ok && curvature == Certainty::pass; }
};

SospReport certify_sosp(const Objective& f, const Matrix& U, const RegParams& reg,
                        const EigenOptions& opts = {});

// ---------------------------------------------------------------------------
// Gradient flow dU/dt = -scale * grad L_pop(U), with scale = 1/4 giving
// -(U U^T - U* U*^T) U.

struct FlowConfig {
  double t_end = 50.0;
  /// 0.25 integrates -(U U^T - X*) U; 1.0 the true negative gradient.
  double field_scale = 0.25;
  /// Per-step local error bound relative to ||U||_F (step doubling).
  double rel_tol = 1e-9;
  double initial_step = 1e-2;
  double min_step = 1e-12;
  double max_step = 1.0;
  long max_steps = 2000000;
  /// Snapshot spacing in time; 0 records every accepted step.
  double snapshot_dt = 0.0;
  /// Stop early once the field norm ||scale * grad|| drops below this.
  double stop_field_norm = 0.0;
  /// Store per-column norms and signal coordinates in every snapshot.
  bool record_columns = true;
};

struct FlowSnapshot {
  double t = 0.0;
  double signal_norm = 0.0;   // ||r(t)||_2
  double noise_norm = 0.0;    // ||E(t)||_F
  double gram_error = 0.0;
  double field_norm = 0.0;
  Vector signal;              // r(t) = U^T u*
  Vector column_norms;
};

struct FlowTrace {
  std::vector<FlowSnapshot> snapshots;
  Matrix U_final;
  bool rank_one = false;
  double r0_sq = 0.0;   // ||r(0)||^2
  double e0_sq = 0.0;   // ||E(0)||_F^2
  /// -(1/2) (log ||r(0)||^2 - 1) / (1 - ||E(0)||_F^2); NaN when undefined.
  double T0 = 0.0;
  long accepted_steps = 0;
  long rejected_steps = 0;
  bool stopped_on_field = false;
};

/// RK4 with step doubling. Signal/noise quantities are filled for r = 1 only.
/// Throws ConvergenceError on step-size underflow or step cap.
FlowTrace gradient_flow(const GroundTruth& star, const Matrix& U0, const FlowConfig& config);

/// Initialization statistics at r = 1.
struct InitStats {
  double r0_sq = 0.0;
  double e0_sq = 0.0;
  double min_abs_signal = 0.0;
  double max_abs_signal = 0.0;
  double T0 = 0.0;
};

InitStats init_stats(const GroundTruth& star, const Matrix& U0);

/// -(1/2) (log r0_sq - 1) / (1 - e0_sq).
double characteristic_time(double r0_sq, double e0_sq);

/// Upper envelope for ||r(t)||^2 from small initialization:
/// sigmoid(2 (t - T0) + 1 + eta).
double signal_upper_envelope(double t, double T0, double eta);

// ---------------------------------------------------------------------------

struct Census {
  Index count = 0;
  std::vector<Index> indices;
};

/// Columns whose norm is at least `threshold` times the largest column norm.
/// Throws InvalidArgument for an all-zero U or threshold outside (0, 1).
Census active_column_census(const Matrix& U, double threshold);

/// Fraction of columns with norm >= x * max norm, for each x in `grid`.
std::vector<double> fraction_above(const Matrix& U, const std::vector<double>& grid);

/// 0, 0.05, ..., 1.
std::vector<double> default_fraction_grid();

}  // namespace colprune
