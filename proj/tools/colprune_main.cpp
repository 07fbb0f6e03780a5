// colprune: experiment runner.
//
//   colprune <command> [--config PATH] [--set key=value]... [--seed N]
//                      [--out DIR] [--plots] [--threads N]
//
// Commands: implicit-reg, pipeline-compare, flow-diagnostics, quadratic-nn,
// rip-report, verify. Each writes manifest.json, report.json and CSV files
// into the output directory (default ./colprune_out/<command>).

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include <colprune/linalg.hpp>
#include <colprune/report_io.hpp>

#include "colprune/experiments/artifacts.hpp"
#include "colprune/experiments/config.hpp"
#include "colprune/experiments/experiments.hpp"
#include "colprune/experiments/verify.hpp"

namespace ex = colprune::experiments;

namespace {

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool plots = false;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.overrides, "override a config key (key=value), repeatable");
  cmd->add_option("--seed", f.seed, "base seed (overrides the config)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--plots", f.plots, "also render SVG plots from the CSV outputs");
  cmd->add_option("--threads", f.threads, "worker threads for independent runs (0 = hardware)");
}

ex::KeyValueConfig load_config(const CommonFlags& f) {
  ex::KeyValueConfig cfg = f.config_path.empty() ? ex::KeyValueConfig{} : ex::KeyValueConfig::load(f.config_path);
  for (const auto& o : f.overrides) cfg.assign(o);
  if (f.seed) cfg.set("seed", std::to_string(*f.seed));
  return cfg;
}

template <class Settings, class Result>
int run_command(const std::string& name, const CommonFlags& f, Result (*run)(const Settings&, const ex::RunOptions&),
                void (*summarize)(const Result&), std::vector<std::uint64_t> (*seeds)(const Settings&)) {
  const auto t0 = std::chrono::steady_clock::now();
  const ex::KeyValueConfig cfg = load_config(f);
  const Settings s = Settings::from_config(cfg);
  for (const auto& key : cfg.unused()) std::cerr << "warning: config key '" << key << "' is not used by " << name << "\n";
  ex::RunOptions opts;
  opts.threads = f.threads ? f.threads : std::max(1u, std::thread::hardware_concurrency());
  opts.plots = f.plots;
  const Result r = run(s, opts);
  const ex::ArtifactDir dir(f.out.empty() ? "colprune_out/" + name : f.out);
  write_artifacts(r, dir, f.plots);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json effective = cfg.effective();
  effective["threads"] = opts.threads;
  effective["plots"] = f.plots;
  auto files = dir.written();
  files.push_back("manifest.json");
  dir.write_json("manifest.json", ex::make_manifest(name, effective, seeds(s), wall, files));
  summarize(r);
  std::cout << "artifacts: " << dir.root().string() << "\n";
  return 0;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
  return out;
}

void summarize_implicit(const ex::ImplicitRegResult& r) {
  std::cout << "unregularized GD: " << r.unregularized.iterations << " iterations, census(" << r.settings.census_threshold
            << ") = " << r.unregularized_census.count << " of " << r.settings.k << " columns, gram error "
            << r.unregularized_gram_error << "\n";
  std::cout << "alpha0 = " << r.alpha0 << " (small-init bound 1/(k^3 d log kd) = " << r.alpha0_bound << ")\n";
  if (r.has_regularized) {
    std::cout << "regularized pipeline: " << r.regularized.surviving_columns << " surviving columns, census = "
              << r.regularized_census.count << ", gram error after fine-tune " << r.regularized.gram_error_after_finetune
              << "\n";
  }
}

void summarize_compare(const ex::PipelineCompareResult& r) {
  for (const auto& t : r.trials) {
    std::cout << "seed " << t.seed << ": c_lambda " << t.chosen_c_lambda << ", survivors " << t.surviving_columns
              << ", pipeline floor " << t.pipeline_floor << ", vanilla floor " << t.vanilla_floor
              << (t.error.empty() ? "" : "  [" + t.error + "]") << "\n";
  }
  if (!r.trials.empty()) {
    std::cout << "median floors: pipeline " << r.median_pipeline_floor << ", vanilla " << r.median_vanilla_floor << "\n";
  }
  for (const auto& p : r.sweep) std::cout << "noise sweep n = " << p.n << ": median floor " << p.median_floor << "\n";
  if (!r.sweep.empty()) std::cout << "log-log slope " << r.sweep_slope << "\n";
}

void summarize_flow(const ex::FlowDiagnosticsResult& r) {
  std::cout << "T0 = " << r.init.T0 << ", ||r(0)||^2 = " << r.init.r0_sq << ", ||E(0)||^2 = " << r.init.e0_sq << "\n";
  std::cout << "||E(t)|| nonincreasing: " << (r.noise_monotone ? "yes" : "no") << " (max increase "
            << r.max_noise_increase << ")\n";
  std::cout << "column law: max deviation " << r.column_law_max_deviation << (r.column_law_ok ? " (ok)" : " (FAIL)")
            << ", final grad norm " << r.final_grad_norm << ", gram error " << r.final_gram_error << "\n";
}

void summarize_nn(const ex::QuadraticNnResult& r) {
  for (const auto& t : r.trials) {
    std::cout << "seed " << t.seed << ": "
              << (t.completed ? std::to_string(t.surviving_columns) + " neurons, gram error " +
                                    std::to_string(t.gram_error_final)
                              : "failed: " + t.error)
              << "\n";
  }
  std::cout << "successes " << r.successes << "/" << r.trials.size();
  if (!r.ablation.empty()) std::cout << ", without correction " << r.ablation_successes << "/" << r.ablation.size();
  std::cout << ", fro estimates within bound: " << (r.fro_estimates_ok ? "yes" : "no") << "\n";
}

void summarize_rip(const ex::RipReportResult& r) {
  for (std::size_t i = 0; i < r.n_values.size(); ++i) {
    std::cout << "n = " << r.n_values[i] << ": delta_hat >= " << r.delta_hat[i] << "\n";
  }
  std::cout << "requirement (c_delta = 1): " << r.requirement << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  colprune::enable_flush_to_zero();
  CLI::App app{"colprune: group-Lasso pruning of overparameterized matrix sensing"};
  app.set_version_flag("--version", colprune::version());
  app.require_subcommand(1);

  CommonFlags f;
  auto* implicit = app.add_subcommand("implicit-reg", "unregularized GD census vs the regularized pipeline");
  auto* compare = app.add_subcommand("pipeline-compare", "vanilla GD vs prune + fine-tune, and the noise sweep");
  auto* flow = app.add_subcommand("flow-diagnostics", "rank-one gradient flow from small initialization");
  auto* nn = app.add_subcommand("quadratic-nn", "pipeline on a quadratic-activation network");
  auto* rip = app.add_subcommand("rip-report", "Monte-Carlo RIP lower bounds vs n");
  auto* verify = app.add_subcommand("verify", "invariant suites; nonzero exit on failure");
  for (auto* c : {implicit, compare, flow, nn, rip, verify}) add_common(c, f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*implicit) {
      return run_command<ex::ImplicitRegSettings, ex::ImplicitRegResult>(
          "implicit-reg", f, &ex::run_implicit_reg, &summarize_implicit,
          [](const ex::ImplicitRegSettings& s) { return std::vector<std::uint64_t>{s.seed}; });
    }
    if (*compare) {
      return run_command<ex::PipelineCompareSettings, ex::PipelineCompareResult>(
          "pipeline-compare", f, &ex::run_pipeline_compare, &summarize_compare,
          [](const ex::PipelineCompareSettings& s) { return seed_range(s.seed, std::max(s.seeds, s.sweep_seeds)); });
    }
    if (*flow) {
      return run_command<ex::FlowDiagnosticsSettings, ex::FlowDiagnosticsResult>(
          "flow-diagnostics", f, &ex::run_flow_diagnostics, &summarize_flow,
          [](const ex::FlowDiagnosticsSettings& s) { return std::vector<std::uint64_t>{s.seed}; });
    }
    if (*nn) {
      return run_command<ex::QuadraticNnSettings, ex::QuadraticNnResult>(
          "quadratic-nn", f, &ex::run_quadratic_nn, &summarize_nn,
          [](const ex::QuadraticNnSettings& s) { return seed_range(s.seed, s.seeds); });
    }
    if (*rip) {
      return run_command<ex::RipReportSettings, ex::RipReportResult>(
          "rip-report", f, &ex::run_rip_report, &summarize_rip,
          [](const ex::RipReportSettings& s) { return std::vector<std::uint64_t>{s.seed}; });
    }
    if (*verify) {
      const auto t0 = std::chrono::steady_clock::now();
      const ex::KeyValueConfig cfg = load_config(f);
      const ex::VerifySettings s = ex::VerifySettings::from_config(cfg);
      for (const auto& key : cfg.unused()) std::cerr << "warning: config key '" << key << "' is not used by verify\n";
      ex::RunOptions opts;
      opts.threads = f.threads ? f.threads : std::max(1u, std::thread::hardware_concurrency());
      const ex::VerifyResult r = ex::run_verify(s, opts);
      const ex::ArtifactDir dir(f.out.empty() ? "colprune_out/verify" : f.out);
      dir.write_json("report.json", r.to_json());
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      dir.write_json("manifest.json", ex::make_manifest("verify", cfg.effective(), {s.seed}, wall,
                                                        {"report.json", "manifest.json"}));
      for (const auto& suite : r.suites) std::cout << (suite.passed ? "PASS " : "FAIL ") << suite.name << "\n";
      std::cout << "artifacts: " << dir.root().string() << "\n";
      return r.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
