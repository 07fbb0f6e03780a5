#include <algorithm>
#include <cmath>
#include <limits>

#include "colprune/errors.hpp"
#include "colprune/linalg.hpp"
#include "colprune/solver.hpp"

namespace colprune {

namespace {

struct Field {
  const Matrix& S;
  double scale;

  Matrix operator()(const Matrix& U) const {
    return (-4.0 * scale) * (U * (U.transpose() * U) - S * (S.transpose() * U));
  }
};

Matrix rk4_step(const Field& F, const Matrix& U, double h) {
  const Matrix k1 = F(U);
  const Matrix k2 = F(U + (0.5 * h) * k1);
  const Matrix k3 = F(U + (0.5 * h) * k2);
  const Matrix k4 = F(U + h * k3);
  return U + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

double characteristic_time(double r0_sq, double e0_sq) {
  if (!(r0_sq > 0.0) || !(e0_sq < 1.0)) return std::numeric_limits<double>::quiet_NaN();
  return -0.5 * (std::log(r0_sq) - 1.0) / (1.0 - e0_sq);
}

double signal_upper_envelope(double t, double T0, double eta) {
  const double x = 2.0 * (t - T0) + 1.0 + eta;
  return 1.0 / (1.0 + std::exp(-x));
}

InitStats init_stats(const GroundTruth& star, const Matrix& U0) {
  if (star.rank() != 1) throw InvalidArgument("init_stats needs a rank-one ground truth");
  if (U0.rows() != star.rows()) throw DimensionError("init_stats: row mismatch");
  const Vector u = star.factor.col(0);
  const Vector r = U0.transpose() * u;
  InitStats s;
  s.r0_sq = r.squaredNorm();
  s.e0_sq = (U0 - u * r.transpose()).squaredNorm();
  s.min_abs_signal = r.cwiseAbs().minCoeff();
  s.max_abs_signal = r.cwiseAbs().maxCoeff();
  s.T0 = characteristic_time(s.r0_sq, s.e0_sq);
  return s;
}

FlowTrace gradient_flow(const GroundTruth& star, const Matrix& U0, const FlowConfig& cfg) {
  require_factor(U0, "U0");
  if (U0.rows() != star.rows()) throw DimensionError("gradient_flow: row mismatch");
  if (!(cfg.t_end > 0.0)) throw InvalidArgument("t_end must be > 0");
  if (!(cfg.rel_tol > 0.0)) throw InvalidArgument("rel_tol must be > 0");
  if (!(cfg.field_scale > 0.0)) throw InvalidArgument("field_scale must be > 0");

  const Field F{star.factor, cfg.field_scale};
  FlowTrace trace;
  trace.rank_one = star.rank() == 1 && std::abs(star.factor.col(0).norm() - 1.0) < 1e-12;
  Vector u;
  if (trace.rank_one) u = star.factor.col(0);

  auto snapshot = [&](double t, const Matrix& U, double field_norm) {
    FlowSnapshot s;
    s.t = t;
    s.gram_error = gram_error(U, star);
    s.field_norm = field_norm;
    if (trace.rank_one) {
      const Vector r = U.transpose() * u;
      s.signal_norm = r.norm();
      s.noise_norm = (U - u * r.transpose()).norm();
      if (cfg.record_columns) s.signal = r;
    }
    if (cfg.record_columns) s.column_norms = column_norms(U);
    trace.snapshots.push_back(std::move(s));
  };

  Matrix U = U0;
  if (trace.rank_one) {
    const InitStats st = init_stats(star, U0);
    trace.r0_sq = st.r0_sq;
    trace.e0_sq = st.e0_sq;
    trace.T0 = st.T0;
  } else {
    trace.T0 = std::numeric_limits<double>::quiet_NaN();
  }

  double t = 0.0;
  double h = std::min(cfg.initial_step, cfg.t_end);
  double field_norm = F(U).norm();
  snapshot(t, U, field_norm);
  double next_snapshot = cfg.snapshot_dt;

  long steps = 0;
  while (t < cfg.t_end) {
    if (cfg.stop_field_norm > 0.0 && field_norm < cfg.stop_field_norm) {
      trace.stopped_on_field = true;
      break;
    }
    if (++steps > cfg.max_steps) throw ConvergenceError("gradient_flow: step cap reached");
    h = std::min(h, cfg.t_end - t);

    const Matrix full = rk4_step(F, U, h);
    const Matrix half = rk4_step(F, rk4_step(F, U, 0.5 * h), 0.5 * h);
    const double scale = std::max(U.norm(), std::numeric_limits<double>::min());
    const double err = (half - full).norm() / 15.0 / scale;
    if (!std::isfinite(err)) throw ConvergenceError("gradient_flow: non-finite state");

    if (err <= cfg.rel_tol) {
      t += h;
      U = half;
      ++trace.accepted_steps;
      field_norm = F(U).norm();
      const bool last = t >= cfg.t_end ||
                        (cfg.stop_field_norm > 0.0 && field_norm < cfg.stop_field_norm);
      if (cfg.snapshot_dt <= 0.0 || t >= next_snapshot || last) {
        snapshot(t, U, field_norm);
        if (cfg.snapshot_dt > 0.0) {
          while (next_snapshot <= t) next_snapshot += cfg.snapshot_dt;
        }
      }
    } else {
      ++trace.rejected_steps;
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(cfg.rel_tol / err, 0.2) : 2.0;
    h *= std::clamp(factor, 0.2, 2.0);
    h = std::min(h, cfg.max_step);
    if (h < cfg.min_step) throw ConvergenceError("gradient_flow: step size underflow");
  }
  trace.U_final = std::move(U);
  return trace;
}

}  // namespace colprune
