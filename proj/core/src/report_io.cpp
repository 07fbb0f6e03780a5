#include "colprune/report_io.hpp"

#include <cmath>
#include <ostream>

#include "colprune/errors.hpp"

#ifndef COLPRUNE_VERSION_STRING
#define COLPRUNE_VERSION_STRING "0.0.0"
#endif

namespace colprune {

using nlohmann::json;

namespace {

json to_json_vec(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json_idx(const std::vector<Index>& v) {
  json a = json::array();
  for (Index i : v) a.push_back(static_cast<long long>(i));
  return a;
}

json to_json(const GdConfig& g) {
  json j{{"step_size", g.step_size},
         {"max_iters", g.max_iters},
         {"perturbation", to_string(g.perturbation)},
         {"perturb_radius", g.perturb_radius},
         {"trigger", to_string(g.trigger)},
         {"perturb_threshold", g.perturb_threshold},
         {"perturb_interval", g.perturb_interval},
         {"escape_decrease", g.escape_decrease},
         {"project_perturbation", g.project_perturbation},
         {"grad_tol", g.grad_tol},
         {"divergence_window", g.divergence_window},
         {"trace_stride", g.trace_stride}};
  j["op_norm_guard"] = g.op_norm_guard ? json(*g.op_norm_guard) : json(nullptr);
  return j;
}

}  // namespace

const char* version() { return COLPRUNE_VERSION_STRING; }

json to_json(const RegParams& p) {
  return json{{"lambda", p.lambda},
              {"beta", p.beta},
              {"epsilon", p.epsilon},
              {"gamma", p.gamma},
              {"within_smoothness_regime", p.within_smoothness_regime()}};
}

json to_json(const SospReport& s) {
  return json{{"grad_norm", s.grad_norm},
              {"lambda_min", s.lambda_min},
              {"lambda_min_residual", s.lambda_min_residual},
              {"residual_tolerance", std::isfinite(s.residual_tolerance) ? json(s.residual_tolerance) : json(nullptr)},
              {"gradient_ok", s.gradient_ok},
              {"curvature", to_string(s.curvature)},
              {"certified", s.certified()},
              {"hvp_products", static_cast<long long>(s.hvp_products)},
              {"dense", s.dense}};
}

json to_json(const PipelineConfig& c) {
  const ProblemConfig& p = c.problem;
  json j;
  j["problem"] = json{{"mode", to_string(p.mode)},
                      {"d", static_cast<long long>(p.d)},
                      {"k", static_cast<long long>(p.k)},
                      {"r", static_cast<long long>(p.r)},
                      {"sigma_r_star", p.sigma_r_star},
                      {"noise_sigma", p.noise_sigma},
                      {"n", static_cast<long long>(p.n)},
                      {"sensing_scale", p.sensing_scale == GaussianScale::unit ? "unit" : "inverse_dim"},
                      {"nn_correction", p.nn_correction},
                      {"nn_estimate_fro", p.nn_estimate_fro}};
  j["constants"] = json{{"c_beta", c.constants.c_beta},
                        {"c_lambda", c.constants.c_lambda},
                        {"c_gamma", c.constants.c_gamma},
                        {"c_epsilon", c.constants.c_epsilon}};
  j["lambda_override"] = c.lambda_override ? json(*c.lambda_override) : json(nullptr);
  j["init_scale"] = c.init_scale;
  j["train"] = to_json(c.train);
  j["max_escape_rounds"] = c.max_escape_rounds;
  j["eigen"] = json{{"dense_limit", static_cast<long long>(c.eigen.dense_limit)},
                    {"force_iterative", c.eigen.force_iterative},
                    {"max_basis", static_cast<long long>(c.eigen.max_basis)},
                    {"rel_tol", c.eigen.rel_tol},
                    {"max_restarts", c.eigen.max_restarts}};
  j["fine_tune"] = json{{"iters", c.fine_tune.iters},
                        {"step_size", c.fine_tune.step_size},
                        {"max_retries", c.fine_tune.max_retries},
                        {"divergence_window", c.fine_tune.divergence_window},
                        {"grad_tol", c.fine_tune.grad_tol}};
  j["seed"] = c.seed;
  return j;
}

json to_json(const PipelineReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["library_version"] = version();
  j["config"] = to_json(r.config);
  j["params"] = to_json(r.params);
  j["params_in_regime"] = r.params_in_regime;
  j["train"] = json{{"iterations", r.train_iterations},
                    {"escape_rounds", r.escape_rounds},
                    {"final_loss", r.train_trace.empty() ? json(nullptr) : json(r.train_trace.back().loss)}};
  j["sosp"] = to_json(r.sosp);
  j["prune"] = json{{"threshold", r.prune_threshold},
                    {"column_norms", to_json_vec(r.column_norms)},
                    {"kept", to_json_idx(r.kept)},
                    {"pruned", to_json_idx(r.pruned)},
                    {"surviving_columns", static_cast<long long>(r.surviving_columns)},
                    {"pruned_mass", r.pruned_mass},
                    {"prune_perturbation", r.prune_perturbation},
                    {"prune_identity_ok", r.prune_identity_ok},
                    {"max_survivor_cosine", r.max_survivor_cosine}};
  j["gram_error"] = json{{"before_prune", r.gram_error_before_prune},
                         {"after_prune", r.gram_error_after_prune},
                         {"after_finetune", r.gram_error_after_finetune}};
  j["fine_tune"] = json{{"step_size", r.fine_tune.step_size},
                        {"retries", r.fine_tune.retries},
                        {"iterations", r.fine_tune.iterations}};
  j["seconds"] = json{{"train", r.seconds.train},
                      {"certify", r.seconds.certify},
                      {"prune", r.seconds.prune},
                      {"fine_tune", r.seconds.fine_tune}};
  return j;
}

json to_json(const InitStats& s) {
  return json{{"r0_sq", s.r0_sq},
              {"e0_sq", s.e0_sq},
              {"min_abs_signal", s.min_abs_signal},
              {"max_abs_signal", s.max_abs_signal},
              {"T0", std::isfinite(s.T0) ? json(s.T0) : json(nullptr)}};
}

void write_gd_trace_csv(const std::vector<GdTraceRow>& trace, std::ostream& out) {
  out.precision(17);
  out << "iter,loss,grad_norm,op_norm,min_col_norm,max_col_norm,gram_error,perturbed\n";
  for (const GdTraceRow& r : trace) {
    out << r.iter << ',' << r.loss << ',' << r.grad_norm << ',' << r.op_norm << ',' << r.min_col_norm << ','
        << r.max_col_norm << ',' << r.gram_error << ',' << (r.perturbed ? 1 : 0) << '\n';
  }
}

void write_fine_tune_csv(const FineTuneResult& ft, std::ostream& out) {
  out.precision(17);
  out << "iter,gram_error,loss\n";
  for (std::size_t i = 0; i < ft.gram_trace.size(); ++i) {
    out << i << ',' << ft.gram_trace[i] << ',' << (i < ft.loss_trace.size() ? ft.loss_trace[i] : 0.0) << '\n';
  }
}

void write_flow_csv(const FlowTrace& trace, std::ostream& out) {
  out.precision(17);
  out << "t,signal_norm,noise_norm,gram_error,field_norm\n";
  for (const FlowSnapshot& s : trace.snapshots) {
    out << s.t << ',' << s.signal_norm << ',' << s.noise_norm << ',' << s.gram_error << ',' << s.field_norm << '\n';
  }
}

void write_flow_coordinates_csv(const FlowTrace& trace, bool signal, std::ostream& out) {
  if (trace.snapshots.empty()) return;
  const Vector& first = signal ? trace.snapshots.front().signal : trace.snapshots.front().column_norms;
  if (first.size() == 0) throw InvalidArgument("flow trace has no per-coordinate data");
  out.precision(17);
  out << 't';
  for (Index i = 0; i < first.size(); ++i) out << ',' << (signal ? "r_" : "col_") << i;
  out << '\n';
  for (const FlowSnapshot& s : trace.snapshots) {
    const Vector& v = signal ? s.signal : s.column_norms;
    out << s.t;
    for (Index i = 0; i < v.size(); ++i) out << ',' << v(i);
    out << '\n';
  }
}

}  // namespace colprune
