#include <chrono>
#include <cmath>

#include <colprune/errors.hpp>
#include <colprune/report_io.hpp>

#include "colprune/experiments/experiments.hpp"
#include "colprune/experiments/pool.hpp"
#include "colprune/experiments/svg.hpp"

namespace colprune::experiments {

namespace {

NnTrial run_trial(const QuadraticNnSettings& s, std::uint64_t seed, bool correction) {
  NnTrial t;
  t.seed = seed;
  t.correction = correction;
  PipelineConfig cfg;
  cfg.problem.mode = ProblemMode::quadratic_network;
  cfg.problem.d = s.d;
  cfg.problem.k = s.k;
  cfg.problem.r = s.r;
  cfg.problem.sigma_r_star = s.sigma_r_star;
  cfg.problem.n = s.measurements();
  cfg.problem.noise_sigma = s.noise_sigma;
  cfg.problem.nn_correction = correction;
  cfg.problem.nn_estimate_fro = true;
  cfg.train.step_size = s.step_size;
  cfg.seed = seed;

  Rng root(seed);
  Rng problem_rng = root.split(0);
  const Problem problem = make_problem(cfg.problem, problem_rng);
  const Vector& y = problem.sensing->observations();
  const double n = static_cast<double>(y.size());
  t.fro_estimate = problem.fro_star;
  t.fro_truth = problem.star.factor.squaredNorm();
  t.fro_standard_error = std::sqrt((y.array() - y.mean()).square().sum() / (n - 1.0) / n);

  try {
    const PipelineReport rep = run_pipeline(cfg, problem);
    t.completed = true;
    t.surviving_columns = rep.surviving_columns;
    t.gram_error_after_prune = rep.gram_error_after_prune;
    t.gram_error_final = rep.gram_error_after_finetune;
    t.certified = rep.sosp.certified();
  } catch (const Error& e) {
    t.error = e.what();
  }
  return t;
}

nlohmann::json trial_json(const NnTrial& t, Index r) {
  return {{"seed", t.seed},
          {"correction", t.correction},
          {"completed", t.completed},
          {"error", t.error},
          {"surviving_columns", t.surviving_columns},
          {"gram_error_after_prune", t.gram_error_after_prune},
          {"gram_error_final", t.gram_error_final},
          {"certified", t.certified},
          {"success", t.success(r)},
          {"fro_estimate", t.fro_estimate},
          {"fro_truth", t.fro_truth},
          {"fro_standard_error", t.fro_standard_error}};
}

}  // namespace

QuadraticNnSettings QuadraticNnSettings::from_config(const KeyValueConfig& cfg) {
  QuadraticNnSettings s;
  s.d = cfg.get_long("nn.d", s.d);
  s.k = cfg.get_long("nn.k", s.k);
  s.r = cfg.get_long("nn.r", s.r);
  s.sigma_r_star = cfg.get_double("nn.sigma_r_star", s.sigma_r_star);
  s.n = cfg.get_long("nn.n", s.n);
  s.noise_sigma = cfg.get_double("nn.noise_sigma", s.noise_sigma);
  s.step_size = cfg.get_double("nn.step_size", s.step_size);
  s.seeds = static_cast<int>(cfg.get_long("nn.seeds", s.seeds));
  s.ablation = cfg.get_bool("nn.ablation", s.ablation);
  s.fro_se_bound = cfg.get_double("nn.fro_se_bound", s.fro_se_bound);
  s.seed = cfg.get_u64("seed", s.seed);
  if (s.d <= 0 || s.k <= 0 || s.r <= 0 || s.r > s.d || s.seeds <= 0 || s.step_size <= 0.0 || s.n < 0) {
    throw InvalidArgument("quadratic-nn needs positive dimensions, r <= d, seeds > 0, step_size > 0");
  }
  return s;
}

QuadraticNnResult run_quadratic_nn(const QuadraticNnSettings& s, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  QuadraticNnResult out;
  out.settings = s;
  const auto m = static_cast<std::size_t>(s.seeds);
  out.trials.resize(m);
  if (s.ablation) out.ablation.resize(m);
  parallel_for(s.ablation ? 2 * m : m, opts.threads, [&](std::size_t job) {
    if (job < m) {
      out.trials[job] = run_trial(s, s.seed + job, true);
    } else {
      out.ablation[job - m] = run_trial(s, s.seed + (job - m), false);
    }
  });
  out.fro_estimates_ok = true;
  for (const auto& t : out.trials) {
    out.successes += t.success(s.r);
    if (std::abs(t.fro_estimate - t.fro_truth) > s.fro_se_bound * t.fro_standard_error) out.fro_estimates_ok = false;
  }
  for (const auto& t : out.ablation) out.ablation_successes += t.success(s.r);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

nlohmann::json QuadraticNnResult::to_json() const {
  nlohmann::json j;
  j["settings"] = {{"d", settings.d},
                   {"k", settings.k},
                   {"r", settings.r},
                   {"sigma_r_star", settings.sigma_r_star},
                   {"n", settings.measurements()},
                   {"noise_sigma", settings.noise_sigma},
                   {"step_size", settings.step_size},
                   {"seeds", settings.seeds},
                   {"seed", settings.seed}};
  j["trials"] = nlohmann::json::array();
  for (const auto& t : trials) j["trials"].push_back(trial_json(t, settings.r));
  j["ablation"] = nlohmann::json::array();
  for (const auto& t : ablation) j["ablation"].push_back(trial_json(t, settings.r));
  j["successes"] = successes;
  j["ablation_successes"] = ablation_successes;
  j["fro_estimates_within_bound"] = fro_estimates_ok;
  j["seconds"] = seconds;
  return j;
}

void write_artifacts(const QuadraticNnResult& r, const ArtifactDir& dir, bool plots) {
  dir.write_json("report.json", r.to_json());
  CsvTable table{{"seed", "correction", "completed", "surviving_columns", "gram_error_after_prune",
                  "gram_error_final", "fro_estimate", "fro_truth", "fro_standard_error"},
                 {}};
  auto add = [&](const NnTrial& t) {
    const double nan = std::nan("");
    table.rows.push_back({static_cast<double>(t.seed), t.correction ? 1.0 : 0.0, t.completed ? 1.0 : 0.0,
                          static_cast<double>(t.surviving_columns), t.completed ? t.gram_error_after_prune : nan,
                          t.completed ? t.gram_error_final : nan, t.fro_estimate, t.fro_truth,
                          t.fro_standard_error});
  };
  for (const auto& t : r.trials) add(t);
  for (const auto& t : r.ablation) add(t);
  dir.write_table("neurons.csv", table);
  (void)plots;  // tabular result only
}

}  // namespace colprune::experiments
