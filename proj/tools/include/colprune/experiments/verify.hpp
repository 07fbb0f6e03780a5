#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <colprune/objectives.hpp>

#include "colprune/experiments/config.hpp"
#include "colprune/experiments/experiments.hpp"

namespace colprune::experiments {

struct VerifySettings {
  std::vector<std::string> suites{"finite_difference", "boundedness", "monotonicity", "orthogonality",
                                  "eigen_oracle"};
  // finite_difference
  int fd_instances = 20;
  double fd_grad_tol = 1e-6;
  double fd_hess_tol = 1e-5;
  /// Test hook: added to every gradient entry before the comparison.
  double gradient_offset = 0.0;
  // boundedness
  int bound_seeds = 50;
  long bound_steps = 10000;
  Index bound_d = 20;
  Index bound_k = 20;
  Index bound_r = 3;
  double bound_cap = 3.0;
  // monotonicity
  int mono_seeds = 5;
  long mono_steps = 2000;
  double mono_slack = 1e-12;
  // orthogonality
  int ortho_seeds = 10;
  double ortho_max_cosine = 0.15;
  // eigen_oracle
  int eig_instances = 10;
  double eig_tol = 1e-6;

  std::uint64_t seed = 1;

  /// Keys: verify.suites (comma separated), verify.fd_instances,
  /// verify.gradient_offset, verify.bound_seeds, verify.bound_steps,
  /// verify.mono_seeds, verify.mono_steps, verify.ortho_seeds,
  /// verify.eig_instances, seed.
  static VerifySettings from_config(const KeyValueConfig& cfg);
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  nlohmann::json detail;
};

struct VerifyResult {
  std::vector<SuiteResult> suites;
  bool passed() const;
  /// Contains no timings, so equal seeds give identical JSON.
  nlohmann::json to_json() const;
};

/// Wraps an objective and adds a constant to every gradient entry (negative
/// control for the finite-difference suite).
class GradientOffset final : public Objective {
 public:
  GradientOffset(ObjectivePtr inner, double offset) : inner_(std::move(inner)), offset_(offset) {}
  ObjectiveKind kind() const override { return inner_->kind(); }
  Index rows() const override { return inner_->rows(); }
  double value(const Matrix& U) const override { return inner_->value(U); }
  Matrix gradient(const Matrix& U) const override { return inner_->gradient(U).array() + offset_; }
  double hess_quadform(const Matrix& U, const Matrix& Z) const override { return inner_->hess_quadform(U, Z); }
  Matrix hvp(const Matrix& U, const Matrix& Z) const override { return inner_->hvp(U, Z); }
  std::string describe() const override { return inner_->describe() + " + gradient offset"; }

 private:
  ObjectivePtr inner_;
  double offset_;
};

SuiteResult verify_finite_difference(const VerifySettings& s);
SuiteResult verify_boundedness(const VerifySettings& s, unsigned threads);
SuiteResult verify_monotonicity(const VerifySettings& s);
SuiteResult verify_orthogonality(const VerifySettings& s, unsigned threads);
SuiteResult verify_eigen_oracle(const VerifySettings& s);

VerifyResult run_verify(const VerifySettings& s, const RunOptions& opts = {});

}  // namespace colprune::experiments
