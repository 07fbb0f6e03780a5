#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <colprune/errors.hpp>
#include <colprune/linalg.hpp>
#include <colprune/report_io.hpp>

#include "colprune/experiments/experiments.hpp"
#include "colprune/experiments/pool.hpp"
#include "colprune/experiments/svg.hpp"

namespace colprune::experiments {

namespace {

constexpr std::uint64_t kValidationStream = 4;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

ProblemConfig problem_config(const PipelineCompareSettings& s, Index n, double sigma) {
  ProblemConfig pc;
  pc.mode = ProblemMode::empirical;
  pc.d = s.d;
  pc.k = s.k;
  pc.r = s.r;
  pc.sigma_r_star = s.sigma_r_star;
  pc.n = n;
  pc.noise_sigma = sigma;
  return pc;
}

PipelineConfig pipeline_config(const PipelineCompareSettings& s, const ProblemConfig& pc, std::uint64_t seed) {
  PipelineConfig c;
  c.problem = pc;
  c.seed = seed;
  c.train.max_iters = s.train_max_iters;
  c.train.trace_stride = s.trace_stride;
  c.fine_tune.iters = s.fine_tune_iters;
  return c;
}

CompareTrial run_trial(const PipelineCompareSettings& s, std::uint64_t seed) {
  CompareTrial t;
  t.seed = seed;
  const ProblemConfig pc = problem_config(s, s.n, s.noise_sigma);
  Rng root(seed);
  Rng problem_rng = root.split(0);
  const Problem problem = make_problem(pc, problem_rng);

  Rng val_rng = root.split(kValidationStream);
  const SensingSet val_raw = gen_gaussian_sensing(s.validation_n, s.d, val_rng, pc.sensing_scale);
  const SensingSet validation = measure(problem.star, val_raw, s.noise_sigma, val_rng);

  PipelineReport best;
  double best_loss = std::numeric_limits<double>::infinity();
  std::string last_error;
  for (double c_lambda : s.c_lambda_grid) {
    PipelineConfig cfg = pipeline_config(s, pc, seed);
    cfg.constants.c_lambda = c_lambda;
    try {
      PipelineReport rep = run_pipeline(cfg, problem);
      const double v = emp_loss(rep.U_final, validation);
      t.validation_losses.push_back(v);
      if (v < best_loss) {
        best_loss = v;
        best = std::move(rep);
        t.chosen_c_lambda = c_lambda;
      }
    } catch (const Error& e) {
      t.validation_losses.push_back(kNaN);
      last_error = e.what();
    }
  }
  if (!std::isfinite(best_loss)) {
    t.error = "every grid entry failed: " + last_error;
    t.pipeline_floor = t.vanilla_floor = kNaN;
    return t;
  }

  t.prune_iter = best.train_iterations;
  t.budget = best.train_iterations + best.fine_tune.iterations;
  t.surviving_columns = best.surviving_columns;
  t.pipeline_floor = best.gram_error_after_finetune;
  for (const GdTraceRow& row : best.train_trace) t.pipeline_curve.emplace_back(row.iter, row.gram_error);
  const auto& g = best.fine_tune.gram_trace;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (j % static_cast<std::size_t>(std::max<long>(1, s.trace_stride)) == 0 || j + 1 == g.size()) {
      t.pipeline_curve.emplace_back(t.prune_iter + static_cast<long>(j), g[j]);
    }
  }

  // Vanilla GD: same initialization and step as regularized training, no
  // regularizer, no pruning, same total number of iterations.
  Rng init_rng = root.split(1);
  const Matrix U0 = init_rng.gaussian(s.d, s.k, best.config.init_scale / std::sqrt(static_cast<double>(s.d)));
  GdConfig gd;
  gd.step_size = best.config.train.step_size;
  gd.max_iters = t.budget;
  gd.trace_stride = s.trace_stride;
  const auto loss = base_objective(problem);
  Rng unused(0);
  try {
    const GdResult v = perturbed_gd(*loss, U0, gd, unused, {}, &problem.star);
    for (const GdTraceRow& row : v.trace) t.vanilla_curve.emplace_back(row.iter, row.gram_error);
    t.vanilla_floor = gram_error(v.U, problem.star);
  } catch (const Error& e) {
    t.error = std::string("vanilla GD: ") + e.what();
    t.vanilla_floor = kNaN;
  }
  return t;
}

}  // namespace

PipelineCompareSettings PipelineCompareSettings::from_config(const KeyValueConfig& cfg) {
  PipelineCompareSettings s;
  s.d = cfg.get_long("compare.d", s.d);
  s.k = cfg.get_long("compare.k", s.k);
  s.r = cfg.get_long("compare.r", s.r);
  s.sigma_r_star = cfg.get_double("compare.sigma_r_star", s.sigma_r_star);
  s.n = cfg.get_long("compare.n", s.n);
  s.noise_sigma = cfg.get_double("compare.noise_sigma", s.noise_sigma);
  s.seeds = static_cast<int>(cfg.get_long("compare.seeds", s.seeds));
  s.c_lambda_grid = cfg.get_doubles("compare.c_lambda_grid", s.c_lambda_grid);
  s.validation_n = cfg.get_long("compare.validation_n", s.validation_n);
  s.train_max_iters = cfg.get_long("compare.train_max_iters", s.train_max_iters);
  s.fine_tune_iters = cfg.get_long("compare.fine_tune_iters", s.fine_tune_iters);
  s.trace_stride = cfg.get_long("compare.trace_stride", s.trace_stride);
  s.compare = cfg.get_bool("compare.enabled", s.compare);
  s.noise_sweep = cfg.get_bool("sweep.enabled", s.noise_sweep);
  s.sweep_sigma = cfg.get_double("sweep.sigma", s.sweep_sigma);
  s.sweep_n = cfg.get_doubles("sweep.n", s.sweep_n);
  s.sweep_seeds = static_cast<int>(cfg.get_long("sweep.seeds", s.sweep_seeds));
  s.seed = cfg.get_u64("seed", s.seed);
  if (s.seeds <= 0 || s.sweep_seeds <= 0) throw InvalidArgument("seed counts must be positive");
  if (s.c_lambda_grid.empty()) throw InvalidArgument("compare.c_lambda_grid is empty");
  if (s.noise_sweep && s.sweep_n.size() < 2) throw InvalidArgument("sweep.n needs at least two values");
  if (s.validation_n <= 0 || s.trace_stride <= 0) throw InvalidArgument("validation_n and trace_stride must be positive");
  return s;
}

PipelineCompareResult run_pipeline_compare(const PipelineCompareSettings& s, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineCompareResult out;
  out.settings = s;

  if (s.compare) {
    out.trials.resize(static_cast<std::size_t>(s.seeds));
    parallel_for(out.trials.size(), opts.threads, [&](std::size_t i) { out.trials[i] = run_trial(s, s.seed + i); });
    std::vector<double> pf, vf;
    for (const auto& t : out.trials) {
      pf.push_back(t.pipeline_floor);
      vf.push_back(t.vanilla_floor);
    }
    out.median_pipeline_floor = median(pf);
    out.median_vanilla_floor = median(vf);
  }

  if (s.noise_sweep) {
    const std::size_t per = static_cast<std::size_t>(s.sweep_seeds);
    out.sweep.resize(s.sweep_n.size());
    for (std::size_t a = 0; a < s.sweep_n.size(); ++a) {
      out.sweep[a].n = static_cast<Index>(s.sweep_n[a]);
      out.sweep[a].floors.assign(per, kNaN);
      out.sweep[a].survivors.assign(per, 0);
    }
    parallel_for(s.sweep_n.size() * per, opts.threads, [&](std::size_t job) {
      SweepPoint& p = out.sweep[job / per];
      const std::size_t i = job % per;
      const PipelineConfig cfg = pipeline_config(s, problem_config(s, p.n, s.sweep_sigma), s.seed + i);
      try {
        const PipelineReport rep = run_pipeline(cfg);
        p.floors[i] = rep.gram_error_after_finetune;
        p.survivors[i] = rep.surviving_columns;
      } catch (const Error&) {
        // recorded as NaN
      }
    });
    std::vector<double> ns, meds;
    for (auto& p : out.sweep) {
      p.median_floor = median(p.floors);
      ns.push_back(static_cast<double>(p.n));
      meds.push_back(p.median_floor);
    }
    try {
      out.sweep_slope = loglog_slope(ns, meds);
    } catch (const Error&) {
      out.sweep_slope = kNaN;
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

nlohmann::json PipelineCompareResult::to_json() const {
  nlohmann::json j;
  j["settings"] = {{"d", settings.d},
                   {"k", settings.k},
                   {"r", settings.r},
                   {"sigma_r_star", settings.sigma_r_star},
                   {"n", settings.n},
                   {"noise_sigma", settings.noise_sigma},
                   {"seeds", settings.seeds},
                   {"c_lambda_grid", settings.c_lambda_grid},
                   {"validation_n", settings.validation_n},
                   {"fine_tune_iters", settings.fine_tune_iters},
                   {"seed", settings.seed}};
  nlohmann::json trials_j = nlohmann::json::array();
  for (const auto& t : trials) {
    trials_j.push_back({{"seed", t.seed},
                        {"chosen_c_lambda", t.chosen_c_lambda},
                        {"validation_losses", t.validation_losses},
                        {"budget", t.budget},
                        {"prune_iter", t.prune_iter},
                        {"surviving_columns", t.surviving_columns},
                        {"pipeline_floor", t.pipeline_floor},
                        {"vanilla_floor", t.vanilla_floor},
                        {"error", t.error}});
  }
  j["trials"] = trials_j;
  j["median_pipeline_floor"] = median_pipeline_floor;
  j["median_vanilla_floor"] = median_vanilla_floor;
  nlohmann::json sweep_j = nlohmann::json::array();
  for (const auto& p : sweep) {
    sweep_j.push_back({{"n", p.n}, {"floors", p.floors}, {"survivors", p.survivors}, {"median_floor", p.median_floor}});
  }
  j["noise_sweep"] = {{"sigma", settings.sweep_sigma}, {"points", sweep_j}, {"loglog_slope", sweep_slope}};
  j["seconds"] = seconds;
  return j;
}

void write_artifacts(const PipelineCompareResult& r, const ArtifactDir& dir, bool plots) {
  dir.write_json("report.json", r.to_json());

  if (!r.trials.empty()) {
    CsvTable summary{{"seed", "chosen_c_lambda", "budget", "prune_iter", "surviving_columns", "pipeline_floor",
                      "vanilla_floor"},
                     {}};
    for (const auto& t : r.trials) {
      summary.rows.push_back({static_cast<double>(t.seed), t.chosen_c_lambda, static_cast<double>(t.budget),
                              static_cast<double>(t.prune_iter), static_cast<double>(t.surviving_columns),
                              t.pipeline_floor, t.vanilla_floor});
    }
    dir.write_table("compare_summary.csv", summary);
  }

  for (const auto& t : r.trials) {
    std::map<long, std::pair<double, double>> merged;
    for (const auto& [it, g] : t.vanilla_curve) merged.try_emplace(it, kNaN, kNaN).first->second.first = g;
    for (const auto& [it, g] : t.pipeline_curve) merged.try_emplace(it, kNaN, kNaN).first->second.second = g;
    CsvTable curve{{"iter", "vanilla", "pipeline"}, {}};
    for (const auto& [it, v] : merged) curve.rows.push_back({static_cast<double>(it), v.first, v.second});
    const std::string name = "compare_seed" + std::to_string(t.seed);
    dir.write_table(name + ".csv", curve);
    if (plots) {
      PlotSpec spec = make_plot("Gram error: vanilla GD vs prune + fine-tune (seed " + std::to_string(t.seed) + ")", "iteration",
                    "||UU^T - X*||_F");
      spec.log_y = true;
      spec.markers.push_back({static_cast<double>(t.prune_iter), "prune"});
      dir.write_text(name + ".svg", render_lines(read_csv(dir.path(name + ".csv")), "iter", {"vanilla", "pipeline"}, spec));
    }
  }

  if (!r.sweep.empty()) {
    CsvTable sweep{{"n", "median_floor"}, {}};
    const std::size_t per = r.sweep.front().floors.size();
    for (std::size_t i = 0; i < per; ++i) sweep.header.push_back("seed" + std::to_string(r.settings.seed + i));
    for (const auto& p : r.sweep) {
      std::vector<double> row{static_cast<double>(p.n), p.median_floor};
      row.insert(row.end(), p.floors.begin(), p.floors.end());
      sweep.rows.push_back(std::move(row));
    }
    dir.write_table("noise_sweep.csv", sweep);
    if (plots) {
      std::ostringstream title;
      title << "Fine-tuned error floor vs n (sigma = " << r.settings.sweep_sigma << ")";
      PlotSpec spec = make_plot(title.str(), "n", "median ||UU^T - X*||_F");
      spec.log_x = spec.log_y = true;
      dir.write_text("noise_sweep.svg", render_lines(read_csv(dir.path("noise_sweep.csv")), "n", {"median_floor"}, spec));
    }
  }
}

}  // namespace colprune::experiments
