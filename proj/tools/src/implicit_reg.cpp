#include <chrono>
#include <cmath>
#include <exception>
#include <thread>
#include <sstream>

#include <colprune/errors.hpp>
#include <colprune/linalg.hpp>
#include <colprune/report_io.hpp>

#include "colprune/experiments/experiments.hpp"
#include "colprune/experiments/svg.hpp"

namespace colprune::experiments {

namespace {

constexpr std::uint64_t kInitStream = 3;

nlohmann::json census_json(const Census& c) { return {{"count", c.count}, {"indices", c.indices}}; }

}  // namespace

ImplicitRegSettings ImplicitRegSettings::from_config(const KeyValueConfig& cfg) {
  ImplicitRegSettings s;
  const std::string preset = cfg.get_string("implicit.preset", "figure");
  if (preset == "desk") {
    s.d = s.k = 200;
    s.r = 1;
    s.sigma_r_star = 1.0;
  } else if (preset != "figure") {
    throw InvalidArgument("implicit.preset must be 'figure' or 'desk', got '" + preset + "'");
  }
  s.d = cfg.get_long("implicit.d", s.d);
  s.k = cfg.get_long("implicit.k", s.k);
  s.r = cfg.get_long("implicit.r", s.r);
  s.sigma_r_star = cfg.get_double("implicit.sigma_r_star", s.sigma_r_star);
  s.alpha0 = cfg.get_double("implicit.alpha0", s.alpha0);
  s.step_size = cfg.get_double("implicit.step_size", s.step_size);
  s.max_iters = cfg.get_long("implicit.max_iters", s.max_iters);
  s.grad_tol = cfg.get_double("implicit.grad_tol", s.grad_tol);
  s.census_threshold = cfg.get_double("implicit.census_threshold", s.census_threshold);
  s.run_regularized = cfg.get_bool("implicit.regularized", s.run_regularized);
  s.seed = cfg.get_u64("seed", s.seed);
  if (s.d <= 0 || s.k <= 0 || s.r <= 0 || s.r > s.d) throw InvalidArgument("implicit-reg needs 0 < r <= d and k > 0");
  if (s.alpha0 < 0.0 || s.step_size <= 0.0) throw InvalidArgument("implicit-reg needs alpha0 >= 0 and step_size > 0");
  return s;
}

ImplicitRegResult run_implicit_reg(const ImplicitRegSettings& s, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  ImplicitRegResult out;
  out.settings = s;
  out.alpha0_bound = small_init_bound(s.d, s.k);
  out.alpha0 = s.alpha0 > 0.0 ? s.alpha0 : out.alpha0_bound;

  PipelineConfig pc;
  pc.problem.mode = ProblemMode::population;
  pc.problem.d = s.d;
  pc.problem.k = s.k;
  pc.problem.r = s.r;
  pc.problem.sigma_r_star = s.sigma_r_star;
  pc.seed = s.seed;
  pc.train.trace_stride = 1000;

  Rng root(s.seed);
  Rng problem_rng = root.split(0);
  const Problem problem = make_problem(pc.problem, problem_rng);
  const auto loss = base_objective(problem);

  Rng init_rng = root.split(kInitStream);
  const Matrix U0 = init_rng.gaussian(s.d, s.k, out.alpha0);

  // The origin is itself a near-stationary point, so the gradient test only
  // counts once the loss has dropped well below its starting value.
  GdConfig gd;
  gd.step_size = s.step_size;
  gd.max_iters = s.max_iters;
  gd.trace_stride = 100;
  const double start_loss = loss->value(U0);
  auto stop = [&](long, const Matrix&, double value, double grad_norm) {
    return !(grad_norm <= s.grad_tol && value < 0.5 * start_loss);
  };

  auto run_unregularized = [&] {
    Rng unused(0);
    out.unregularized = perturbed_gd(*loss, U0, gd, unused, stop, &problem.star);
    out.unregularized_gram_error = gram_error(out.unregularized.U, problem.star);
    out.unregularized_census = active_column_census(out.unregularized.U, s.census_threshold);
  };
  auto run_regularized = [&] {
    if (!s.run_regularized) return;
    out.regularized = run_pipeline(pc, problem);
    out.has_regularized = true;
    out.regularized_census = active_column_census(out.regularized.U_train, s.census_threshold);
  };
  if (opts.threads > 1 && s.run_regularized) {
    std::exception_ptr err;
    std::thread worker([&] {
      enable_flush_to_zero();
      try {
        run_regularized();
      } catch (...) {
        err = std::current_exception();
      }
    });
    run_unregularized();
    worker.join();
    if (err) std::rethrow_exception(err);
  } else {
    run_unregularized();
    run_regularized();
  }

  out.grid = default_fraction_grid();
  out.unregularized_fraction = fraction_above(out.unregularized.U, out.grid);
  if (out.has_regularized) out.regularized_fraction = fraction_above(out.regularized.U_train, out.grid);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

nlohmann::json ImplicitRegResult::to_json() const {
  nlohmann::json j;
  j["settings"] = {{"d", settings.d},
                   {"k", settings.k},
                   {"r", settings.r},
                   {"sigma_r_star", settings.sigma_r_star},
                   {"step_size", settings.step_size},
                   {"max_iters", settings.max_iters},
                   {"grad_tol", settings.grad_tol},
                   {"census_threshold", settings.census_threshold},
                   {"seed", settings.seed}};
  j["alpha0"] = alpha0;
  j["alpha0_small_init_bound"] = alpha0_bound;
  j["unregularized"] = {{"iterations", unregularized.iterations},
                        {"stop_reason", to_string(unregularized.reason)},
                        {"final_loss", unregularized.final_loss},
                        {"final_grad_norm", unregularized.final_grad_norm},
                        {"gram_error", unregularized_gram_error},
                        {"census", census_json(unregularized_census)}};
  if (has_regularized) {
    j["regularized"] = {{"census", census_json(regularized_census)},
                        {"surviving_columns", regularized.surviving_columns},
                        {"report", colprune::to_json(regularized)}};
  }
  j["fraction_grid"] = grid;
  j["seconds"] = seconds;
  return j;
}

void write_artifacts(const ImplicitRegResult& r, const ArtifactDir& dir, bool plots) {
  dir.write_json("report.json", r.to_json());
  std::ostringstream trace;
  write_gd_trace_csv(r.unregularized.trace, trace);
  dir.write_text("gd_trace.csv", trace.str());
  if (r.has_regularized) {
    std::ostringstream reg;
    write_gd_trace_csv(r.regularized.train_trace, reg);
    dir.write_text("regularized_trace.csv", reg.str());
  }

  const Vector un = column_norms(r.unregularized.U);
  const Vector rn = r.has_regularized ? column_norms(r.regularized.U_train) : Vector::Constant(un.size(), std::nan(""));
  CsvTable norms{{"column", "unregularized", "regularized", "unregularized_ratio", "regularized_ratio"}, {}};
  const double umax = un.maxCoeff();
  const double rmax = r.has_regularized ? rn.maxCoeff() : std::nan("");
  for (Index i = 0; i < un.size(); ++i) {
    norms.rows.push_back({static_cast<double>(i), un(i), rn(i), un(i) / umax, rn(i) / rmax});
  }
  dir.write_table("column_norms.csv", norms);

  CsvTable frac{{"x", "unregularized", "regularized"}, {}};
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    frac.rows.push_back({r.grid[i], r.unregularized_fraction[i],
                         r.has_regularized ? r.regularized_fraction[i] : std::nan("")});
  }
  dir.write_table("fraction_above.csv", frac);

  if (!plots) return;
  const CsvTable f = read_csv(dir.path("fraction_above.csv"));
  PlotSpec fs = make_plot("Fraction of columns with norm >= x * max", "x", "fraction of columns");
  dir.write_text("fraction_above.svg", render_lines(f, "x", {"unregularized", "regularized"}, fs));
  const CsvTable n = read_csv(dir.path("column_norms.csv"));
  PlotSpec hs = make_plot("Column norms relative to the largest (unregularized)", "||U e_i|| / max_j ||U e_j||", "count");
  dir.write_text("column_norm_histogram.svg", render_histogram(n, "unregularized_ratio", 20, 0.0, 1.0, hs));
  if (r.has_regularized) {
    hs.title = "Column norms relative to the largest (regularized)";
    dir.write_text("column_norm_histogram_regularized.svg",
                   render_histogram(n, "regularized_ratio", 20, 0.0, 1.0, hs));
  }
}

}  // namespace colprune::experiments
