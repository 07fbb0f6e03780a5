#include <chrono>

#include <colprune/errors.hpp>
#include <colprune/sensing.hpp>

#include "colprune/experiments/experiments.hpp"
#include "colprune/experiments/pool.hpp"
#include "colprune/experiments/svg.hpp"

namespace colprune::experiments {

RipReportSettings RipReportSettings::from_config(const KeyValueConfig& cfg) {
  RipReportSettings s;
  s.d = cfg.get_long("rip.d", s.d);
  s.k = cfg.get_long("rip.k", s.k);
  s.r = cfg.get_long("rip.r", s.r);
  s.sigma_r_star = cfg.get_double("rip.sigma_r_star", s.sigma_r_star);
  s.rank_bound = cfg.get_long("rip.rank_bound", s.rank_bound);
  s.n_values = cfg.get_doubles("rip.n", s.n_values);
  s.trials = cfg.get_long("rip.trials", s.trials);
  s.seed = cfg.get_u64("seed", s.seed);
  if (s.d <= 0 || s.k <= 0 || s.r <= 0 || s.trials <= 0 || s.n_values.empty() || s.rank_bound < 0) {
    throw InvalidArgument("rip-report needs positive d, k, r, trials and at least one n");
  }
  return s;
}

RipReportResult run_rip_report(const RipReportSettings& s, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  RipReportResult out;
  out.settings = s;
  const Index rank = s.rank_bound > 0 ? s.rank_bound : std::min<Index>(2 * s.k, s.d);
  out.requirement = rip_requirement(s.sigma_r_star, s.k, s.r);
  out.delta_hat.assign(s.n_values.size(), 0.0);
  for (double n : s.n_values) out.n_values.push_back(static_cast<Index>(n));
  parallel_for(s.n_values.size(), opts.threads, [&](std::size_t i) {
    Rng root(s.seed);
    Rng sensing_rng = root.split(2 * i);
    Rng probe_rng = root.split(2 * i + 1);
    const SensingSet A = gen_gaussian_sensing(out.n_values[i], s.d, sensing_rng);
    out.delta_hat[i] = rip_estimate(A, rank, s.trials, probe_rng).delta_hat;
  });
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

nlohmann::json RipReportResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    rows.push_back({{"n", n_values[i]}, {"delta_hat", delta_hat[i]}, {"meets_requirement", delta_hat[i] <= requirement}});
  }
  return {{"settings",
           {{"d", settings.d},
            {"k", settings.k},
            {"r", settings.r},
            {"sigma_r_star", settings.sigma_r_star},
            {"rank_bound", settings.rank_bound > 0 ? settings.rank_bound : std::min<Index>(2 * settings.k, settings.d)},
            {"trials", settings.trials},
            {"seed", settings.seed}}},
          {"note", "delta_hat is a Monte-Carlo lower bound on the RIP constant, not a certificate"},
          {"requirement", requirement},
          {"rows", rows},
          {"seconds", seconds}};
}

void write_artifacts(const RipReportResult& r, const ArtifactDir& dir, bool plots) {
  dir.write_json("report.json", r.to_json());
  CsvTable t{{"n", "delta_hat", "requirement"}, {}};
  for (std::size_t i = 0; i < r.n_values.size(); ++i) {
    t.rows.push_back({static_cast<double>(r.n_values[i]), r.delta_hat[i], r.requirement});
  }
  dir.write_table("rip.csv", t);
  if (!plots) return;
  PlotSpec spec = make_plot("Monte-Carlo RIP lower bound vs n", "n", "delta");
  spec.log_x = spec.log_y = true;
  dir.write_text("rip.svg", render_lines(read_csv(dir.path("rip.csv")), "n", {"delta_hat", "requirement"}, spec));
}

}  // namespace colprune::experiments
