#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <colprune/errors.hpp>
#include <colprune/linalg.hpp>
#include <colprune/objectives.hpp>
#include <colprune/report_io.hpp>

#include "colprune/experiments/experiments.hpp"
#include "colprune/experiments/svg.hpp"

namespace colprune::experiments {

FlowDiagnosticsSettings FlowDiagnosticsSettings::from_config(const KeyValueConfig& cfg) {
  FlowDiagnosticsSettings s;
  s.d = cfg.get_long("flow.d", s.d);
  s.k = cfg.get_long("flow.k", s.k);
  s.alpha0 = cfg.get_double("flow.alpha0", s.alpha0);
  s.grad_tol = cfg.get_double("flow.grad_tol", s.grad_tol);
  s.t_end = cfg.get_double("flow.t_end", s.t_end);
  s.field_scale = cfg.get_double("flow.field_scale", s.field_scale);
  s.rel_tol = cfg.get_double("flow.rel_tol", s.rel_tol);
  s.snapshot_dt = cfg.get_double("flow.snapshot_dt", s.snapshot_dt);
  s.monotone_slack = cfg.get_double("flow.monotone_slack", s.monotone_slack);
  s.law_tolerance = cfg.get_double("flow.law_tolerance", s.law_tolerance);
  s.seed = cfg.get_u64("seed", s.seed);
  if (cfg.has("flow.r") && cfg.get_long("flow.r", 1) != 1) {
    throw InvalidArgument("flow-diagnostics is defined for r = 1 only");
  }
  if (s.d <= 1 || s.k <= 0 || s.alpha0 <= 0.0 || s.t_end <= 0.0 || s.field_scale <= 0.0) {
    throw InvalidArgument("flow-diagnostics needs d > 1, k > 0 and positive alpha0, t_end, field_scale");
  }
  return s;
}

FlowDiagnosticsResult run_flow_diagnostics(const FlowDiagnosticsSettings& s, const RunOptions&) {
  const auto t0 = std::chrono::steady_clock::now();
  FlowDiagnosticsResult out;
  out.settings = s;
  Rng root(s.seed);
  Rng problem_rng = root.split(0);
  out.star = gen_ground_truth(s.d, 1, 1.0, problem_rng);
  Rng init_rng = root.split(1);
  const Matrix U0 = init_rng.gaussian(s.d, s.k, s.alpha0);
  out.init = init_stats(out.star, U0);
  const Vector u = out.star.factor.col(0) / out.star.factor.col(0).norm();
  out.r0 = U0.transpose() * u;

  FlowConfig fc;
  fc.t_end = s.t_end;
  fc.field_scale = s.field_scale;
  fc.rel_tol = s.rel_tol;
  fc.snapshot_dt = s.snapshot_dt;
  fc.stop_field_norm = s.grad_tol * s.field_scale;
  out.trace = gradient_flow(out.star, U0, fc);

  const auto& snaps = out.trace.snapshots;
  out.max_noise_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < snaps.size(); ++j) {
    out.max_noise_increase = std::max(out.max_noise_increase, snaps[j].noise_norm - snaps[j - 1].noise_norm);
  }
  out.noise_monotone = out.max_noise_increase <= s.monotone_slack;

  const Vector norms = column_norms(out.trace.U_final);
  const Vector predicted = out.r0.cwiseAbs() / out.r0.norm();
  out.column_law_ratio = norms.cwiseQuotient(predicted);
  out.column_law_max_deviation = (out.column_law_ratio.array() - 1.0).abs().maxCoeff();
  out.column_law_ok = out.column_law_max_deviation <= s.law_tolerance;

  out.final_grad_norm = pop_grad(out.trace.U_final, out.star).norm();
  out.final_gram_error = gram_error(out.trace.U_final, out.star);
  out.final_signal_norm = snaps.empty() ? 0.0 : snaps.back().signal_norm;

  out.envelope_eta = out.init.r0_sq;
  out.max_envelope_violation = -std::numeric_limits<double>::infinity();
  out.max_logistic_violation = -std::numeric_limits<double>::infinity();
  for (const auto& sn : snaps) {
    const double env = signal_upper_envelope(sn.t, out.init.T0, out.envelope_eta);
    out.max_envelope_violation = std::max(out.max_envelope_violation, sn.signal_norm * sn.signal_norm - env);
    const double z = 2.0 * sn.t + std::log(out.init.r0_sq / (1.0 - out.init.r0_sq));
    out.max_logistic_violation =
        std::max(out.max_logistic_violation, sn.signal_norm * sn.signal_norm - 1.0 / (1.0 + std::exp(-z)));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

nlohmann::json FlowDiagnosticsResult::to_json() const {
  nlohmann::json j;
  j["settings"] = {{"d", settings.d},
                   {"k", settings.k},
                   {"alpha0", settings.alpha0},
                   {"grad_tol", settings.grad_tol},
                   {"t_end", settings.t_end},
                   {"field_scale", settings.field_scale},
                   {"rel_tol", settings.rel_tol},
                   {"seed", settings.seed}};
  j["init"] = colprune::to_json(init);
  j["snapshots"] = trace.snapshots.size();
  j["accepted_steps"] = trace.accepted_steps;
  j["rejected_steps"] = trace.rejected_steps;
  j["stopped_on_gradient"] = trace.stopped_on_field;
  j["t_final"] = trace.snapshots.empty() ? 0.0 : trace.snapshots.back().t;
  j["noise_monotone"] = {{"pass", noise_monotone},
                         {"max_increase", max_noise_increase},
                         {"slack", settings.monotone_slack}};
  j["column_law"] = {{"pass", column_law_ok},
                     {"max_relative_deviation", column_law_max_deviation},
                     {"tolerance", settings.law_tolerance}};
  j["signal_envelope"] = {{"eta", envelope_eta}, {"max_violation", max_envelope_violation}, {"max_logistic_violation", max_logistic_violation}};
  j["final"] = {{"grad_norm", final_grad_norm}, {"gram_error", final_gram_error}, {"signal_norm", final_signal_norm}};
  j["seconds"] = seconds;
  return j;
}

void write_artifacts(const FlowDiagnosticsResult& r, const ArtifactDir& dir, bool plots) {
  dir.write_json("report.json", r.to_json());
  {
    std::ostringstream os;
    write_flow_csv(r.trace, os);
    dir.write_text("flow.csv", os.str());
  }
  {
    std::ostringstream os;
    write_flow_coordinates_csv(r.trace, true, os);
    dir.write_text("signal_coordinates.csv", os.str());
  }
  CsvTable law{{"column", "r0", "predicted_norm", "final_norm", "ratio"}, {}};
  const Vector norms = column_norms(r.trace.U_final);
  for (Index i = 0; i < norms.size(); ++i) {
    law.rows.push_back({static_cast<double>(i), r.r0(i), std::abs(r.r0(i)) / r.r0.norm(), norms(i),
                        r.column_law_ratio(i)});
  }
  dir.write_table("column_law.csv", law);

  CsvTable env{{"t", "signal_sq", "envelope"}, {}};
  for (const auto& sn : r.trace.snapshots) {
    env.rows.push_back({sn.t, sn.signal_norm * sn.signal_norm, signal_upper_envelope(sn.t, r.init.T0, r.envelope_eta)});
  }
  dir.write_table("signal_envelope.csv", env);

  if (!plots) return;
  PlotSpec spec = make_plot("Signal and noise norms under gradient flow", "t", "norm");
  spec.markers.push_back({r.init.T0, "T0"});
  dir.write_text("flow.svg", render_lines(read_csv(dir.path("flow.csv")), "t", {"signal_norm", "noise_norm"}, spec));
  PlotSpec es = make_plot("Signal norm squared against its upper envelope", "t", "||r(t)||^2");
  es.markers.push_back({r.init.T0, "T0"});
  dir.write_text("signal_envelope.svg",
                 render_lines(read_csv(dir.path("signal_envelope.csv")), "t", {"signal_sq", "envelope"}, es));
  PlotSpec ls = make_plot("Limiting column norm / predicted", "column", "ratio");
  dir.write_text("column_law.svg", render_lines(read_csv(dir.path("column_law.csv")), "column", {"ratio"}, ls));
}

}  // namespace colprune::experiments
