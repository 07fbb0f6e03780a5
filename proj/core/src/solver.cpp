#include "colprune/solver.hpp"

#include <cmath>
#include <limits>

#include "colprune/errors.hpp"
#include "colprune/linalg.hpp"

namespace colprune {

const char* to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::none: return "none";
    case PerturbationKind::uniform_ball: return "uniform_ball";
    case PerturbationKind::gaussian: return "gaussian";
  }
  return "unknown";
}

const char* to_string(PerturbTrigger trigger) {
  switch (trigger) {
    case PerturbTrigger::always: return "always";
    case PerturbTrigger::on_small_gradient: return "on_small_gradient";
  }
  return "unknown";
}

PerturbationKind parse_perturbation(const std::string& name) {
  if (name == "none") return PerturbationKind::none;
  if (name == "uniform_ball" || name == "uniform-ball") return PerturbationKind::uniform_ball;
  if (name == "gaussian") return PerturbationKind::gaussian;
  throw InvalidArgument("unknown perturbation kind '" + name + "'");
}

PerturbTrigger parse_trigger(const std::string& name) {
  if (name == "always") return PerturbTrigger::always;
  if (name == "on_small_gradient" || name == "on-small-gradient") return PerturbTrigger::on_small_gradient;
  throw InvalidArgument("unknown perturbation trigger '" + name + "'");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::grad_tol: return "grad_tol";
    case StopReason::no_escape: return "no_escape";
    case StopReason::callback: return "callback";
  }
  return "unknown";
}

const char* to_string(Certainty c) {
  switch (c) {
    case Certainty::pass: return "pass";
    case Certainty::fail: return "fail";
    case Certainty::unknown: return "unknown";
  }
  return "unknown";
}

namespace {

void validate(const GdConfig& c) {
  if (!(std::isfinite(c.step_size) && c.step_size > 0.0)) throw InvalidArgument("step_size must be > 0");
  if (c.max_iters < 0) throw InvalidArgument("max_iters must be >= 0");
  if (c.perturbation != PerturbationKind::none && !(c.perturb_radius > 0.0)) {
    throw InvalidArgument("perturb_radius must be > 0");
  }
  if (c.perturbation == PerturbationKind::uniform_ball && c.project_perturbation && c.perturb_radius > 1.0) {
    throw InvalidArgument("uniform-ball radius must be <= 1 when the projection is requested");
  }
  if (c.perturb_interval < 1) throw InvalidArgument("perturb_interval must be >= 1");
  if (c.op_norm_guard && !(*c.op_norm_guard > 0.0)) throw InvalidArgument("op_norm_guard must be > 0");
}

GdTraceRow make_row(long iter, const Matrix& U, double loss, double grad_norm, bool perturbed,
                    const GroundTruth* reference) {
  GdTraceRow row;
  row.iter = iter;
  row.loss = loss;
  row.grad_norm = grad_norm;
  row.op_norm = op_norm(U);
  const Vector norms = column_norms(U);
  row.min_col_norm = norms.minCoeff();
  row.max_col_norm = norms.maxCoeff();
  row.perturbed = perturbed;
  if (reference) row.gram_error = gram_error(U, *reference);
  return row;
}

}  // namespace

Matrix draw_perturbation(Index d, Index k, const GdConfig& config, Rng& rng) {
  Matrix P;
  switch (config.perturbation) {
    case PerturbationKind::none:
      return Matrix::Zero(d, k);
    case PerturbationKind::uniform_ball:
      P = rng.uniform_frobenius_ball(d, k, config.perturb_radius);
      break;
    case PerturbationKind::gaussian:
      P = rng.gaussian(d, k, config.perturb_radius);
      break;
  }
  if (config.project_perturbation) P = project_op_norm_ball(P, 1.0);
  return P;
}

GdResult perturbed_gd(const Objective& f, const Matrix& U0, const GdConfig& config, Rng& rng,
                      const IterationCallback& callback, const GroundTruth* reference) {
  validate(config);
  require_factor(U0, "U0");
  if (U0.rows() != f.rows()) throw DimensionError("U0 row count does not match the objective");

  GdResult out;
  Matrix U = U0;
  const double alpha = config.step_size;
  const bool perturbing = config.perturbation != PerturbationKind::none;

  if (config.op_norm_guard) {
    const double on = op_norm(U);
    out.max_op_norm = on;
    if (on > *config.op_norm_guard) throw GuardViolation(0, on, *config.op_norm_guard);
  }

  // The objective value is only evaluated when something consumes it.
  const bool value_every_step = config.divergence_window > 0 || config.escape_decrease > 0.0 || callback;
  double loss = f.value(U);
  Matrix g = f.gradient(U);
  double gn = g.norm();
  if (config.trace_stride > 0) out.trace.push_back(make_row(0, U, loss, gn, false, reference));

  long last_perturb = std::numeric_limits<long>::min() / 2;
  bool in_escape = false;
  double loss_at_perturb = 0.0;
  long increases = 0;
  long t = 0;
  bool last_perturbed = false;

  for (; t < config.max_iters; ++t) {
    if (callback && !callback(t, U, loss, gn)) {
      out.reason = StopReason::callback;
      break;
    }
    if (in_escape && t - last_perturb >= config.perturb_interval) {
      in_escape = false;
      if (config.escape_decrease > 0.0 && loss_at_perturb - loss < config.escape_decrease) {
        out.reason = StopReason::no_escape;
        break;
      }
    }
    if (!perturbing && config.grad_tol > 0.0 && gn <= config.grad_tol) {
      out.reason = StopReason::grad_tol;
      break;
    }

    bool perturb = false;
    if (perturbing) {
      perturb = config.trigger == PerturbTrigger::always ||
                (gn <= config.perturb_threshold && t - last_perturb >= config.perturb_interval);
    }
    if (perturb) {
      g += draw_perturbation(U.rows(), U.cols(), config, rng);
      ++out.perturbations;
      if (config.trigger == PerturbTrigger::on_small_gradient) {
        last_perturb = t;
        in_escape = true;
        loss_at_perturb = loss;
      }
    }
    last_perturbed = perturb;

    U.noalias() -= alpha * g;
    if (!U.allFinite()) {
      throw DivergenceError("non-finite iterate at iteration " + std::to_string(t + 1) +
                            " (step size " + std::to_string(alpha) + ")");
    }
    if (config.op_norm_guard) {
      const double on = op_norm(U);
      out.max_op_norm = std::max(out.max_op_norm, on);
      if (on > *config.op_norm_guard) throw GuardViolation(t + 1, on, *config.op_norm_guard);
    }

    g = f.gradient(U);
    gn = g.norm();
    const bool traced = config.trace_stride > 0 && (t + 1) % config.trace_stride == 0;
    if (value_every_step || traced || t + 1 == config.max_iters) {
      const double next_loss = f.value(U);
      if (!std::isfinite(next_loss)) {
        throw DivergenceError("non-finite objective at iteration " + std::to_string(t + 1));
      }
      increases = next_loss > loss ? increases + 1 : 0;
      loss = next_loss;
    } else {
      loss = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(gn)) {
      throw DivergenceError("non-finite gradient at iteration " + std::to_string(t + 1));
    }
    if (config.divergence_window > 0 && increases >= config.divergence_window) {
      throw DivergenceError("objective increased for " + std::to_string(increases) +
                            " consecutive iterations at step size " + std::to_string(alpha) +
                            "; try a smaller step");
    }
    if (traced) {
      out.trace.push_back(make_row(t + 1, U, loss, gn, perturb, reference));
    }
  }

  out.iterations = t;
  if (!std::isfinite(loss)) loss = f.value(U);
  if (config.trace_stride > 0 && (out.trace.empty() || out.trace.back().iter != t)) {
    out.trace.push_back(make_row(t, U, loss, gn, last_perturbed, reference));
  }
  out.U = std::move(U);
  out.final_loss = loss;
  out.final_grad_norm = gn;
  return out;
}

SospReport certify_sosp(const Objective& f, const Matrix& U, const RegParams& reg, const EigenOptions& opts) {
  reg.validate();
  require_factor(U);
  SospReport rep;
  rep.grad_norm = f.gradient(U).norm();
  rep.gradient_ok = rep.grad_norm <= reg.epsilon;

  const EigenResult eig = hessian_min_eigenpair(f, U, opts);
  rep.lambda_min = eig.value;
  rep.lambda_min_residual = eig.residual;
  rep.residual_tolerance = eig.dense ? std::numeric_limits<double>::infinity()
                                     : opts.rel_tol * std::max(eig.norm_estimate, 1e-300);
  rep.hvp_products = eig.products;
  rep.dense = eig.dense;
  rep.direction = eig.vector;
  if (!eig.converged) {
    rep.curvature = Certainty::unknown;
  } else {
    rep.curvature = eig.value >= -reg.gamma ? Certainty::pass : Certainty::fail;
  }
  return rep;
}

Census active_column_census(const Matrix& U, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("census threshold must lie in (0, 1)");
  const Vector norms = column_norms(U);
  const double top = norms.size() ? norms.maxCoeff() : 0.0;
  if (!(top > 0.0)) throw InvalidArgument("census of an all-zero matrix");
  Census c;
  for (Index i = 0; i < norms.size(); ++i) {
    if (norms(i) >= threshold * top) c.indices.push_back(i);
  }
  c.count = static_cast<Index>(c.indices.size());
  return c;
}

std::vector<double> fraction_above(const Matrix& U, const std::vector<double>& grid) {
  const Vector norms = column_norms(U);
  const double top = norms.size() ? norms.maxCoeff() : 0.0;
  if (!(top > 0.0)) throw InvalidArgument("fraction_above of an all-zero matrix");
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    Index c = 0;
    for (Index i = 0; i < norms.size(); ++i) c += norms(i) >= x * top ? 1 : 0;
    out.push_back(static_cast<double>(c) / static_cast<double>(norms.size()));
  }
  return out;
}

std::vector<double> default_fraction_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(0.05 * i);
  return g;
}

}  // namespace colprune
