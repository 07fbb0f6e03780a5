#include "colprune/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "colprune/errors.hpp"
#include "colprune/linalg.hpp"

namespace colprune {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Substream ids for one pipeline run.
constexpr std::uint64_t kProblemStream = 0;
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTrainStream = 2;

// Moves along +-v with shrinking steps until f decreases. Returns false when
// no tried step helps.
bool escape_along(const Objective& f, Matrix& U, const Vector& v, double scale) {
  const Matrix V = Eigen::Map<const Matrix>(v.data(), U.rows(), U.cols());
  const double f0 = f.value(U);
  double s = scale;
  for (int j = 0; j < 12; ++j, s *= 0.5) {
    for (double sign : {1.0, -1.0}) {
      Matrix trial = U + (sign * s) * V;
      if (f.value(trial) < f0) {
        U = std::move(trial);
        return true;
      }
    }
  }
  return false;
}

}  // namespace

RegParams default_params(double sigma_r_star, Index r, Index k, const Constants& c) {
  if (!(sigma_r_star > 0.0) || r < 1 || k < 1) throw InvalidArgument("default_params: inputs must be positive");
  if (!(c.c_beta > 0.0 && c.c_lambda >= 0.0 && c.c_gamma > 0.0 && c.c_epsilon > 0.0)) {
    throw InvalidArgument("default_params: constants must be positive");
  }
  const double s = sigma_r_star;
  const double rd = static_cast<double>(r);
  const double kd = static_cast<double>(k);
  RegParams p;
  p.beta = c.c_beta * s * s / rd;
  p.lambda = c.c_lambda * s * s * s / std::sqrt(kd * rd);
  p.gamma = c.c_gamma * s * s * s / (std::sqrt(kd) * std::pow(rd, 2.5));
  p.epsilon = c.c_epsilon * std::pow(s, 3.5) / (std::sqrt(kd) * std::pow(rd, 2.5));
  return p;
}

const char* to_string(ProblemMode mode) {
  switch (mode) {
    case ProblemMode::population: return "population";
    case ProblemMode::empirical: return "empirical";
    case ProblemMode::quadratic_network: return "quadratic_network";
  }
  return "unknown";
}

ProblemMode parse_problem_mode(const std::string& name) {
  if (name == "population") return ProblemMode::population;
  if (name == "empirical") return ProblemMode::empirical;
  if (name == "quadratic_network" || name == "quadratic-network" || name == "nn") {
    return ProblemMode::quadratic_network;
  }
  throw InvalidArgument("unknown problem mode '" + name + "'");
}

Problem make_problem(const ProblemConfig& config, Rng& rng) {
  if (config.d < 1 || config.k < 1 || config.r < 1) throw InvalidArgument("problem dimensions must be positive");
  if (config.noise_sigma < 0.0) throw InvalidArgument("noise sigma must be >= 0");
  Problem p;
  p.config = config;
  p.star = gen_ground_truth(config.d, config.r, config.sigma_r_star, rng);
  switch (config.mode) {
    case ProblemMode::population:
      break;
    case ProblemMode::empirical: {
      if (config.n < 1) throw InvalidArgument("empirical mode needs n >= 1");
      const SensingSet raw = gen_gaussian_sensing(config.n, config.d, rng, config.sensing_scale);
      p.sensing = std::make_shared<const SensingSet>(measure(p.star, raw, config.noise_sigma, rng));
      break;
    }
    case ProblemMode::quadratic_network: {
      if (config.n < 1) throw InvalidArgument("quadratic-network mode needs n >= 1");
      const SensingSet raw = gen_rank_one_sensing(config.n, config.d, rng);
      p.sensing = std::make_shared<const SensingSet>(measure(p.star, raw, config.noise_sigma, rng));
      p.fro_star = config.nn_estimate_fro ? estimate_fro_star(*p.sensing) : p.star.factor.squaredNorm();
      break;
    }
  }
  return p;
}

ObjectivePtr base_objective(const Problem& problem) {
  switch (problem.config.mode) {
    case ProblemMode::population: return population_loss(problem.star);
    case ProblemMode::empirical: return empirical_loss(problem.sensing);
    case ProblemMode::quadratic_network:
      return std::make_shared<QuadNetLoss>(problem.sensing, problem.fro_star, problem.config.nn_correction);
  }
  throw InvalidArgument("unknown problem mode");
}

PruneResult greedy_prune(const Matrix& U, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("greedy_prune: beta must be > 0");
  PruneResult out;
  out.threshold = 2.0 * std::sqrt(beta);
  const Vector norms = column_norms(U);
  for (Index i = 0; i < U.cols(); ++i) {
    (norms(i) > out.threshold ? out.kept : out.pruned).push_back(i);
  }
  out.U.resize(U.rows(), static_cast<Index>(out.kept.size()));
  for (std::size_t j = 0; j < out.kept.size(); ++j) out.U.col(static_cast<Index>(j)) = U.col(out.kept[j]);
  return out;
}

FineTuneResult fine_tune(const Matrix& U_prune, const Objective& loss, const GroundTruth& star,
                         const FineTuneConfig& config) {
  if (U_prune.cols() == 0) throw InvalidArgument("fine_tune: no columns to tune");
  if (config.iters < 0 || config.max_retries < 0) throw InvalidArgument("fine_tune: negative budget");
  double step = config.step_size > 0.0 ? config.step_size : 0.1 / (star.sigma_1() * star.sigma_1());

  for (int attempt = 0;; ++attempt) {
    FineTuneResult out;
    out.step_size = step;
    out.retries = attempt;
    out.gram_trace.reserve(static_cast<std::size_t>(config.iters) + 1);
    out.gram_trace.push_back(gram_error(U_prune, star));
    out.loss_trace.push_back(loss.value(U_prune));

    GdConfig gd;
    gd.step_size = step;
    gd.max_iters = config.iters;
    gd.grad_tol = config.grad_tol;
    gd.divergence_window = config.divergence_window;
    gd.trace_stride = 0;
    Rng unused(0);
    try {
      GdResult res = perturbed_gd(loss, U_prune, gd, unused, [&](long it, const Matrix& U, double f, double) {
        if (it > 0) {
          out.gram_trace.push_back(gram_error(U, star));
          out.loss_trace.push_back(f);
        }
        return true;
      });
      if (res.iterations > static_cast<long>(out.gram_trace.size()) - 1) {
        out.gram_trace.push_back(gram_error(res.U, star));
        out.loss_trace.push_back(res.final_loss);
      }
      out.iterations = res.iterations;
      out.U = std::move(res.U);
      return out;
    } catch (const DivergenceError& e) {
      if (attempt >= config.max_retries) {
        throw DivergenceError(std::string("fine-tuning diverged after ") + std::to_string(attempt) +
                              " step halvings: " + e.what());
      }
      step *= 0.5;
    }
  }
}

GdConfig default_train_config() {
  GdConfig c;
  c.step_size = 0.08;
  c.max_iters = 300000;
  c.trace_stride = 100;
  return c;
}

PipelineReport run_pipeline(const PipelineConfig& config) {
  Rng root(config.seed);
  Rng problem_rng = root.split(kProblemStream);
  Problem problem;
  try {
    problem = make_problem(config.problem, problem_rng);
  } catch (const Error& e) {
    throw PipelineError("setup", e.what());
  }
  return run_pipeline(config, problem);
}

PipelineReport run_pipeline(const PipelineConfig& config, const Problem& problem) {
  PipelineReport rep;
  rep.config = config;
  const Index d = problem.star.rows();
  const Index k = config.problem.k;
  const Index r = problem.star.rank();

  ObjectivePtr base;
  ObjectivePtr f;
  try {
    rep.params = default_params(problem.star.sigma_r_star(), r, k, config.constants);
    if (config.lambda_override) rep.params.lambda = *config.lambda_override;
    rep.params.validate();
    rep.params_in_regime = rep.params.within_smoothness_regime();
    base = base_objective(problem);
    f = regularized(base, rep.params);
  } catch (const Error& e) {
    throw PipelineError("setup", e.what());
  }

  Rng root(config.seed);
  Rng init_rng = root.split(kInitStream);
  Rng train_rng = root.split(kTrainStream);
  Matrix U = init_rng.gaussian(d, k, config.init_scale / std::sqrt(static_cast<double>(d)));

  GdConfig train = config.train;
  if (train.grad_tol <= 0.0) train.grad_tol = rep.params.epsilon;
  if (train.perturbation != PerturbationKind::none && train.perturb_threshold <= 0.0) {
    train.perturb_threshold = rep.params.epsilon;
  }

  // Train to an approximate SOSP: GD until the gradient is small, then check
  // curvature and step along a negative-curvature direction if needed.
  try {
    for (int round = 0;; ++round) {
      auto tt = Clock::now();
      GdResult res = perturbed_gd(*f, U, train, train_rng, {}, &problem.star);
      rep.seconds.train += seconds_since(tt);
      for (GdTraceRow row : res.trace) {
        row.iter += rep.train_iterations;
        if (!rep.train_trace.empty() && rep.train_trace.back().iter == row.iter) continue;
        rep.train_trace.push_back(row);
      }
      rep.train_iterations += res.iterations;
      U = std::move(res.U);

      auto tc = Clock::now();
      rep.sosp = certify_sosp(*f, U, rep.params, config.eigen);
      rep.seconds.certify += seconds_since(tc);
      if (rep.sosp.curvature != Certainty::fail || round >= config.max_escape_rounds) break;
      const double scale = 0.1 * std::max(1.0, U.norm());
      if (!escape_along(*f, U, rep.sosp.direction, scale)) break;
      ++rep.escape_rounds;
    }
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError("train", e.what());
  }
  rep.U_train = U;
  rep.column_norms = column_norms(U);

  auto tp = Clock::now();
  const PruneResult pr = greedy_prune(U, rep.params.beta);
  rep.kept = pr.kept;
  rep.pruned = pr.pruned;
  rep.surviving_columns = static_cast<Index>(pr.kept.size());
  rep.prune_threshold = pr.threshold;
  rep.gram_error_before_prune = gram_error(U, problem.star);
  for (Index i : pr.pruned) rep.pruned_mass += rep.column_norms(i) * rep.column_norms(i);
  rep.prune_perturbation = pr.U.cols() ? gram_distance(pr.U, U) : (U * U.transpose()).norm();
  rep.prune_identity_ok = rep.prune_perturbation <= rep.pruned_mass * (1.0 + 1e-12) + 1e-12;
  rep.seconds.prune = seconds_since(tp);
  if (rep.surviving_columns == 0) {
    throw PipelineError("prune", "every column fell at or below the threshold 2 sqrt(beta) = " +
                                     std::to_string(pr.threshold) + "; the constants are mis-set");
  }
  rep.gram_error_after_prune = gram_error(pr.U, problem.star);
  rep.max_survivor_cosine = max_offdiag_cosine(pr.U);

  auto tf = Clock::now();
  try {
    rep.fine_tune = fine_tune(pr.U, *base, problem.star, config.fine_tune);
  } catch (const Error& e) {
    throw PipelineError("fine_tune", e.what());
  }
  rep.seconds.fine_tune = seconds_since(tf);
  rep.U_final = rep.fine_tune.U;
  rep.gram_error_after_finetune = gram_error(rep.U_final, problem.star);
  return rep;
}

std::vector<PipelineReport> lambda_sweep(const PipelineConfig& config, const std::vector<double>& lambdas) {
  Rng root(config.seed);
  Rng problem_rng = root.split(kProblemStream);
  const Problem problem = make_problem(config.problem, problem_rng);
  std::vector<PipelineReport> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    PipelineConfig c = config;
    c.lambda_override = lambda;
    out.push_back(run_pipeline(c, problem));
  }
  return out;
}

}  // namespace colprune
