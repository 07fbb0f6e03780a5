#include "colprune/experiments/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

#include <colprune/eigensolver.hpp>
#include <colprune/errors.hpp>
#include <colprune/linalg.hpp>
#include <colprune/pipeline.hpp>
#include <colprune/sensing.hpp>
#include <colprune/solver.hpp>

#include "colprune/experiments/pool.hpp"

namespace colprune::experiments {

namespace {

struct Smooth {
  std::function<double(const Matrix&)> value;
  std::function<Matrix(const Matrix&)> gradient;
  std::function<double(const Matrix&, const Matrix&)> quadform;
};

Smooth wrap(ObjectivePtr f) {
  return {[f](const Matrix& U) { return f->value(U); }, [f](const Matrix& U) { return f->gradient(U); },
          [f](const Matrix& U, const Matrix& Z) { return f->hess_quadform(U, Z); }};
}

Matrix fd_gradient(const Smooth& f, const Matrix& U, double h) {
  Matrix g(U.rows(), U.cols());
  Matrix V = U;
  for (Index j = 0; j < U.cols(); ++j) {
    for (Index i = 0; i < U.rows(); ++i) {
      const double u = U(i, j);
      V(i, j) = u + h;
      const double fp = f.value(V);
      V(i, j) = u - h;
      const double fm = f.value(V);
      V(i, j) = u;
      g(i, j) = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

double fd_quadform(const Smooth& f, const Matrix& U, const Matrix& Z, double h) {
  return (f.value(U + h * Z) - 2.0 * f.value(U) + f.value(U - h * Z)) / (h * h);
}

struct Instance {
  GroundTruth star;
  Matrix U;
  Matrix Z;
  Index d, k;
};

Instance draw_instance(Rng& rng) {
  Instance in;
  in.d = 3 + static_cast<Index>(rng.next_u64() % 8);  // 3..10
  in.k = 2 + static_cast<Index>(rng.next_u64() % 5);  // 2..6
  const Index r = 1 + static_cast<Index>(rng.next_u64() % 3);
  in.star = gen_ground_truth(in.d, r, r == 1 ? 1.0 : 0.5, rng);
  in.U = rng.gaussian(in.d, in.k, 0.6);
  in.Z = rng.gaussian(in.d, in.k);
  in.Z /= in.Z.norm();
  return in;
}

}  // namespace

VerifySettings VerifySettings::from_config(const KeyValueConfig& cfg) {
  VerifySettings s;
  if (cfg.has("verify.suites")) {
    s.suites.clear();
    std::string list = cfg.get_string("verify.suites", "");
    std::size_t pos = 0;
    while (pos <= list.size()) {
      const std::size_t comma = std::min(list.find(',', pos), list.size());
      std::string item = list.substr(pos, comma - pos);
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      if (!item.empty()) s.suites.push_back(item);
      pos = comma + 1;
    }
  }
  for (const auto& name : s.suites) {
    static const std::vector<std::string> known{"finite_difference", "boundedness", "monotonicity", "orthogonality",
                                                "eigen_oracle"};
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw InvalidArgument("unknown verify suite '" + name + "'");
    }
  }
  s.fd_instances = static_cast<int>(cfg.get_long("verify.fd_instances", s.fd_instances));
  s.gradient_offset = cfg.get_double("verify.gradient_offset", s.gradient_offset);
  s.bound_seeds = static_cast<int>(cfg.get_long("verify.bound_seeds", s.bound_seeds));
  s.bound_steps = cfg.get_long("verify.bound_steps", s.bound_steps);
  s.mono_seeds = static_cast<int>(cfg.get_long("verify.mono_seeds", s.mono_seeds));
  s.mono_steps = cfg.get_long("verify.mono_steps", s.mono_steps);
  s.ortho_seeds = static_cast<int>(cfg.get_long("verify.ortho_seeds", s.ortho_seeds));
  s.eig_instances = static_cast<int>(cfg.get_long("verify.eig_instances", s.eig_instances));
  s.seed = cfg.get_u64("seed", s.seed);
  return s;
}

bool VerifyResult::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
}

nlohmann::json VerifyResult::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  j["suites"] = nlohmann::json::array();
  for (const auto& s : suites) j["suites"].push_back({{"name", s.name}, {"passed", s.passed}, {"detail", s.detail}});
  return j;
}

SuiteResult verify_finite_difference(const VerifySettings& s) {
  SuiteResult out{"finite_difference", true, {}};
  Rng root(s.seed);
  const double h_grad = 1e-6;
  const double h_hess = 1e-4;
  struct Worst {
    double grad = 0.0, hess = 0.0, hvp = 0.0;
  };
  std::map<std::string, Worst> worst;
  double reg_identity = 0.0;

  for (int inst = 0; inst < s.fd_instances; ++inst) {
    Rng rng = root.split(static_cast<std::uint64_t>(inst));
    const Instance in = draw_instance(rng);
    const RegParams reg{0.3, 0.05, 1e-3, 1e-3};

    std::vector<std::pair<std::string, ObjectivePtr>> objs;
    objs.emplace_back("population", population_loss(in.star));
    {
      const Index n = 30 + static_cast<Index>(rng.next_u64() % 40);
      auto A = std::make_shared<const SensingSet>(measure(in.star, gen_gaussian_sensing(n, in.d, rng), 0.1, rng));
      objs.emplace_back("empirical", empirical_loss(A));
    }
    objs.emplace_back("regularized", regularized(population_loss(in.star), reg));
    {
      auto X = std::make_shared<const SensingSet>(measure(in.star, gen_rank_one_sensing(80, in.d, rng), 0.0, rng));
      objs.emplace_back("quadratic_network", nn_objective(X, estimate_fro_star(*X), RegParams{0.1, 0.05, 1e-3, 1e-3}));
    }
    for (auto& [name, f] : objs) {
      if (s.gradient_offset != 0.0) f = std::make_shared<GradientOffset>(f, s.gradient_offset);
      const Smooth sm = wrap(f);
      const Matrix g = f->gradient(in.U);
      const Matrix gfd = fd_gradient(sm, in.U, h_grad);
      const double ge = (g - gfd).norm() / std::max(g.norm(), 1e-12);
      const double q = f->hess_quadform(in.U, in.Z);
      const double qe = std::abs(fd_quadform(sm, in.U, in.Z, h_hess) - q) / std::max(std::abs(q), 1.0);
      const double he = std::abs(frob_inner(in.Z, f->hvp(in.U, in.Z)) - q) / std::max(std::abs(q), 1.0);
      Worst& w = worst[name];
      w.grad = std::max(w.grad, ge);
      w.hess = std::max(w.hess, qe);
      w.hvp = std::max(w.hvp, he);
    }
    const Matrix ud = in.U * d_diag(in.U, reg.beta).asDiagonal();
    reg_identity = std::max(reg_identity, (reg_grad(in.U, reg.beta) - ud).norm() / ud.norm());
  }
  for (const auto& [name, w] : worst) {
    const bool ok = w.grad <= s.fd_grad_tol && w.hess <= s.fd_hess_tol && w.hvp <= s.fd_hess_tol;
    out.passed = out.passed && ok;
    out.detail[name] = {{"max_grad_rel_error", w.grad}, {"max_hess_rel_error", w.hess}, {"max_hvp_rel_error", w.hvp}, {"pass", ok}};
  }
  const bool id_ok = reg_identity <= 1e-14;
  out.passed = out.passed && id_ok;
  out.detail["reg_grad_equals_UD"] = {{"max_rel_error", reg_identity}, {"pass", id_ok}};
  out.detail["instances"] = s.fd_instances;
  out.detail["gradient_offset"] = s.gradient_offset;
  return out;
}

SuiteResult verify_boundedness(const VerifySettings& s, unsigned threads) {
  SuiteResult out{"boundedness", true, {}};
  const std::size_t m = static_cast<std::size_t>(s.bound_seeds);
  std::vector<double> max_op(m, 0.0);
  std::vector<std::string> errors(m);
  Rng root(s.seed);
  parallel_for(m, threads, [&](std::size_t i) {
    Rng rng = root.split(1000 + i);
    const GroundTruth star = gen_ground_truth(s.bound_d, s.bound_r, 0.5, rng);
    RegParams reg = default_params(star.sigma_r_star(), s.bound_r, s.bound_k);
    reg.lambda = 0.9 * std::sqrt(reg.beta);
    const auto f = regularized(population_loss(star), reg, 0.25);
    Matrix U0 = rng.gaussian(s.bound_d, s.bound_k);
    U0 *= s.bound_cap / op_norm(U0);
    GdConfig gd;
    gd.step_size = 0.125;
    gd.max_iters = s.bound_steps;
    gd.perturbation = PerturbationKind::uniform_ball;
    gd.perturb_radius = 1.0;
    gd.trigger = PerturbTrigger::always;
    gd.project_perturbation = true;
    gd.op_norm_guard = s.bound_cap * (1.0 + 1e-12);
    gd.trace_stride = 0;
    try {
      max_op[i] = perturbed_gd(*f, U0, gd, rng).max_op_norm;
    } catch (const GuardViolation& e) {
      max_op[i] = e.op_norm();
      errors[i] = e.what();
    } catch (const Error& e) {
      max_op[i] = std::nan("");
      errors[i] = e.what();
    }
  });
  int violations = 0;
  nlohmann::json failures = nlohmann::json::array();
  for (std::size_t i = 0; i < m; ++i) {
    if (!errors[i].empty()) {
      ++violations;
      failures.push_back({{"run", i}, {"error", errors[i]}});
    }
  }
  out.passed = violations == 0;
  out.detail = {{"runs", m},
                {"steps", s.bound_steps},
                {"cap", s.bound_cap},
                {"max_op_norm", *std::max_element(max_op.begin(), max_op.end())},
                {"violations", violations},
                {"failures", failures}};
  return out;
}

SuiteResult verify_monotonicity(const VerifySettings& s) {
  SuiteResult out{"monotonicity", true, {}};
  Rng root(s.seed);
  double worst_increase = -std::numeric_limits<double>::infinity();
  nlohmann::json runs = nlohmann::json::array();
  for (int i = 0; i < s.mono_seeds; ++i) {
    Rng rng = root.split(2000 + static_cast<std::uint64_t>(i));
    const Index d = 8, k = 6, r = 2;
    const GroundTruth star = gen_ground_truth(d, r, 0.5, rng);
    const RegParams reg = default_params(star.sigma_r_star(), r, k);
    std::vector<std::pair<std::string, ObjectivePtr>> objs;
    objs.emplace_back("regularized_population", regularized(population_loss(star), reg));
    auto A = std::make_shared<const SensingSet>(measure(star, gen_gaussian_sensing(200, d, rng), 0.05, rng));
    objs.emplace_back("regularized_empirical", regularized(empirical_loss(A), reg));
    const Matrix U0 = rng.gaussian(d, k, 0.5);
    for (const auto& [name, f] : objs) {
      // Lipschitz estimate: spectral norm of the Hessian at U0 (or 1, whichever is larger).
      const Eigen::SelfAdjointEigenSolver<Matrix> es(dense_hessian(*f, U0), Eigen::EigenvaluesOnly);
      const double L = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
      GdConfig gd;
      gd.step_size = 1.0 / (8.0 * L);
      gd.max_iters = s.mono_steps;
      gd.trace_stride = 0;
      double prev = std::numeric_limits<double>::infinity();
      double inc = -std::numeric_limits<double>::infinity();
      Rng unused(0);
      perturbed_gd(*f, U0, gd, unused, [&](long, const Matrix&, double v, double) {
        inc = std::max(inc, v - prev);
        prev = v;
        return true;
      });
      worst_increase = std::max(worst_increase, inc);
      runs.push_back({{"objective", name}, {"run", i}, {"step_size", gd.step_size}, {"max_increase", inc}});
    }
  }
  out.passed = worst_increase <= s.mono_slack;
  out.detail = {{"max_increase", worst_increase}, {"slack", s.mono_slack}, {"runs", runs}};
  return out;
}

SuiteResult verify_orthogonality(const VerifySettings& s, unsigned threads) {
  SuiteResult out{"orthogonality", true, {}};
  const std::size_t m = static_cast<std::size_t>(s.ortho_seeds);
  std::vector<double> cosines(m, std::nan(""));
  std::vector<Index> surv(m, 0);
  std::vector<int> identity(m, 0);
  std::vector<std::string> errors(m);
  parallel_for(m, threads, [&](std::size_t i) {
    PipelineConfig cfg;
    cfg.seed = s.seed + i;
    cfg.train.trace_stride = 0;
    try {
      const PipelineReport rep = run_pipeline(cfg);
      cosines[i] = rep.max_survivor_cosine;
      surv[i] = rep.surviving_columns;
      identity[i] = rep.prune_identity_ok;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  double worst = 0.0;
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < m; ++i) {
    const bool ok = errors[i].empty() && cosines[i] <= s.ortho_max_cosine && identity[i];
    out.passed = out.passed && ok;
    if (errors[i].empty()) worst = std::max(worst, cosines[i]);
    runs.push_back({{"seed", s.seed + i},
                    {"max_survivor_cosine", cosines[i]},
                    {"surviving_columns", surv[i]},
                    {"prune_identity_ok", identity[i] != 0},
                    {"error", errors[i]}});
  }
  out.detail = {{"max_cosine", worst}, {"bound", s.ortho_max_cosine}, {"runs", runs}};
  return out;
}

SuiteResult verify_eigen_oracle(const VerifySettings& s) {
  SuiteResult out{"eigen_oracle", true, {}};
  Rng root(s.seed);
  double worst = 0.0;
  nlohmann::json runs = nlohmann::json::array();
  for (int i = 0; i < s.eig_instances; ++i) {
    Rng rng = root.split(3000 + static_cast<std::uint64_t>(i));
    const Index d = 8 + 2 * (i % 4), k = 5 + (i % 6);  // dk between 40 and 180
    const Index r = 2;
    const GroundTruth star = gen_ground_truth(d, r, 0.5, rng);
    const RegParams reg = default_params(star.sigma_r_star(), r, k);
    const auto f = regularized(population_loss(star), reg);
    const Matrix U = rng.gaussian(d, k, 0.3);

    EigenOptions opts;
    opts.force_iterative = true;
    const EigenResult lz = hessian_min_eigenpair(*f, U, opts);

    // Oracle: symmetrized central differences of the analytic gradient.
    const Index n = d * k;
    Matrix H(n, n);
    const double h = 1e-5;
    for (Index c = 0; c < n; ++c) {
      Matrix E = Matrix::Zero(d, k);
      E(c % d, c / d) = h;
      const Matrix diff = (f->gradient(U + E) - f->gradient(U - E)) / (2.0 * h);
      H.col(c) = Eigen::Map<const Vector>(diff.data(), n);
    }
    H = 0.5 * (H + H.transpose()).eval();
    const double oracle = Eigen::SelfAdjointEigenSolver<Matrix>(H, Eigen::EigenvaluesOnly).eigenvalues()(0);
    const double err = std::abs(lz.value - oracle);
    worst = std::max(worst, err);
    runs.push_back({{"d", d}, {"k", k}, {"lanczos", lz.value}, {"oracle", oracle}, {"abs_error", err},
                    {"converged", lz.converged}, {"products", lz.products}});
    out.passed = out.passed && err <= s.eig_tol && lz.converged;
  }
  out.detail = {{"max_abs_error", worst}, {"tolerance", s.eig_tol}, {"runs", runs}};
  return out;
}

VerifyResult run_verify(const VerifySettings& s, const RunOptions& opts) {
  VerifyResult out;
  for (const auto& name : s.suites) {
    if (name == "finite_difference") out.suites.push_back(verify_finite_difference(s));
    else if (name == "boundedness") out.suites.push_back(verify_boundedness(s, opts.threads));
    else if (name == "monotonicity") out.suites.push_back(verify_monotonicity(s));
    else if (name == "orthogonality") out.suites.push_back(verify_orthogonality(s, opts.threads));
    else if (name == "eigen_oracle") out.suites.push_back(verify_eigen_oracle(s));
    else throw InvalidArgument("unknown verify suite '" + name + "'");
  }
  return out;
}

}  // namespace colprune::experiments
