#pragma once

#include <memory>
#include <string>

#include "colprune/sensing.hpp"
#include "colprune/types.hpp"

namespace colprune {

/// Regularization and certification parameters.
struct RegParams {
  double lambda = 0.0;   // regularization weight
  double beta = 1.0;     // smoothing of the column l2 norm
  double epsilon = 1e-3; // gradient-norm tolerance of an approximate SOSP
  double gamma = 1e-3;   // Hessian eigenvalue tolerance of an approximate SOSP

  /// lambda <= min(beta, sqrt(beta)), the regime the smoothness and
  /// boundedness results are stated for. Other values are allowed but flagged.
  bool within_smoothness_regime() const;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Smoothed group-Lasso regularizer R_beta(U) = sum_i l2_beta(U e_i),
// l2_beta(v) = ||v||^2 / sqrt(||v||^2 + beta).

/// beta = 0 is accepted here (and only here) to expose the plain l2 limit.
double smooth_l2(const Eigen::Ref<const Vector>& v, double beta);
double reg_value(const Matrix& U, double beta);
/// D_ii = (s_i + 2 beta) / (s_i + beta)^{3/2}, s_i = ||U e_i||^2.
Vector d_diag(const Matrix& U, double beta);
/// G_ii = (s_i + 4 beta) / (s_i + beta)^{5/2}.
Vector g_diag(const Matrix& U, double beta);
/// U D(U).
Matrix reg_grad(const Matrix& U, double beta);
/// <D, Z^T Z> - sum_i G_ii <U e_i, Z e_i>^2.
double reg_hess_quadform(const Matrix& U, double beta, const Matrix& Z);
/// Column i: D_ii Z e_i - G_ii <U e_i, Z e_i> U e_i.
Matrix reg_hvp(const Matrix& U, double beta, const Matrix& Z);

// ---------------------------------------------------------------------------
// Population loss ||U U^T - U* U*^T||_F^2.

double pop_loss(const Matrix& U, const GroundTruth& star);
/// 4 (U U^T - U* U*^T) U, evaluated through k x k products.
Matrix pop_grad(const Matrix& U, const GroundTruth& star);
/// 4 <Z, (U U^T - U* U*^T) Z> + 2 ||U Z^T + Z U^T||_F^2.
double pop_hess_quadform(const Matrix& U, const GroundTruth& star, const Matrix& Z);
/// 4 [(U Z^T + Z U^T) U + (U U^T - U* U*^T) Z].
Matrix pop_hvp(const Matrix& U, const GroundTruth& star, const Matrix& Z);

// ---------------------------------------------------------------------------
// Empirical loss (1/n) sum_i (<A_i, U U^T> - y_i)^2.

double emp_loss(const Matrix& U, const SensingSet& sensing);
/// (4/n) sum_i res_i A_i U.
Matrix emp_grad(const Matrix& U, const SensingSet& sensing);
/// (2/n) sum_i <A_i, U Z^T + Z U^T>^2 + (4/n) sum_i res_i <A_i, Z Z^T>.
double emp_hess_quadform(const Matrix& U, const SensingSet& sensing, const Matrix& Z);
Matrix emp_hvp(const Matrix& U, const SensingSet& sensing, const Matrix& Z);

// ---------------------------------------------------------------------------

enum class ObjectiveKind { population, empirical, quadratic_network };

const char* to_string(ObjectiveKind kind);

/// Smooth objective over d x k factors with gradient and Hessian access.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual ObjectiveKind kind() const = 0;
  virtual Index rows() const = 0;

  virtual double value(const Matrix& U) const = 0;
  virtual Matrix gradient(const Matrix& U) const = 0;
  /// vec(Z)^T Hess(U) vec(Z).
  virtual double hess_quadform(const Matrix& U, const Matrix& Z) const = 0;
  /// Hess(U) applied to Z.
  virtual Matrix hvp(const Matrix& U, const Matrix& Z) const = 0;

  virtual std::string describe() const = 0;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

class PopulationLoss final : public Objective {
 public:
  explicit PopulationLoss(GroundTruth star);

  ObjectiveKind kind() const override { return ObjectiveKind::population; }
  Index rows() const override { return star_.rows(); }
  double value(const Matrix& U) const override;
  Matrix gradient(const Matrix& U) const override;
  double hess_quadform(const Matrix& U, const Matrix& Z) const override;
  Matrix hvp(const Matrix& U, const Matrix& Z) const override;
  std::string describe() const override;

  const GroundTruth& truth() const { return star_; }

 private:
  GroundTruth star_;
};

/// Empirical squared error over a measured sensing set.
///
/// For dense sets with more measurements than packed entries the gradient and
/// HVP go through the cached normal matrix P^T P, which is exact because the
/// loss is quadratic in U U^T; the value is always summed from residuals.
class EmpiricalLoss final : public Objective {
 public:
  explicit EmpiricalLoss(std::shared_ptr<const SensingSet> sensing, bool use_normal_cache = true);

  ObjectiveKind kind() const override { return ObjectiveKind::empirical; }
  Index rows() const override { return sensing_->dim(); }
  double value(const Matrix& U) const override;
  Matrix gradient(const Matrix& U) const override;
  double hess_quadform(const Matrix& U, const Matrix& Z) const override;
  Matrix hvp(const Matrix& U, const Matrix& Z) const override;
  std::string describe() const override;

  const SensingSet& sensing() const { return *sensing_; }
  bool uses_normal_cache() const { return cached_; }

 private:
  /// (1/n) sum_i res_i A_i for dense sets.
  Matrix residual_operator(const Matrix& U) const;

  std::shared_ptr<const SensingSet> sensing_;
  bool cached_ = false;
  Matrix normal_;   // P^T P / n
  Vector moment_;   // P^T y / n
};

/// Quadratic-network loss over rank-one measurements,
/// L_NN(U) - (||U||_F^2 - fro_star)^2, where the correction removes the
/// trace term of E<x x^T, X>^2 = 2 ||X||_F^2 + tr(X)^2. With the correction
/// disabled it is plain L_NN.
class QuadNetLoss final : public Objective {
 public:
  QuadNetLoss(std::shared_ptr<const SensingSet> sensing, double fro_star, bool correction = true);

  ObjectiveKind kind() const override { return ObjectiveKind::quadratic_network; }
  Index rows() const override { return sensing_->dim(); }
  double value(const Matrix& U) const override;
  Matrix gradient(const Matrix& U) const override;
  double hess_quadform(const Matrix& U, const Matrix& Z) const override;
  Matrix hvp(const Matrix& U, const Matrix& Z) const override;
  std::string describe() const override;

  double fro_star() const { return fro_star_; }
  bool correction() const { return correction_; }

 private:
  std::shared_ptr<const SensingSet> sensing_;
  double fro_star_;
  bool correction_;
};

/// loss_scale * base + lambda * R_beta.
///
/// loss_scale = 1 is the true gradient of the squared loss. loss_scale = 0.25
/// reproduces the field -(U U^T - U* U*^T) U - lambda U D(U) under which the
/// operator-norm boundedness of perturbed GD (alpha <= 1/8, lambda <= sqrt(beta))
/// holds; with the full-scale gradient that step size is four times too large.
class Regularized final : public Objective {
 public:
  Regularized(ObjectivePtr base, RegParams reg, double loss_scale = 1.0);

  ObjectiveKind kind() const override { return base_->kind(); }
  Index rows() const override { return base_->rows(); }
  double value(const Matrix& U) const override;
  Matrix gradient(const Matrix& U) const override;
  double hess_quadform(const Matrix& U, const Matrix& Z) const override;
  Matrix hvp(const Matrix& U, const Matrix& Z) const override;
  std::string describe() const override;

  const Objective& base() const { return *base_; }
  const RegParams& reg() const { return reg_; }
  double loss_scale() const { return loss_scale_; }

 private:
  ObjectivePtr base_;
  RegParams reg_;
  double loss_scale_;
};

ObjectivePtr population_loss(GroundTruth star);
ObjectivePtr empirical_loss(std::shared_ptr<const SensingSet> sensing);
ObjectivePtr regularized(ObjectivePtr base, const RegParams& reg, double loss_scale = 1.0);

/// f_NN = L_NN - (||U||^2 - fro_star)^2 + lambda R_beta. Throws unless the
/// set is rank-one.
ObjectivePtr nn_objective(std::shared_ptr<const SensingSet> quad_sensing, double fro_star,
                          const RegParams& reg, bool correction = true);

/// ||U*||_F^2 estimated as the mean of the observations.
double estimate_fro_star(const SensingSet& quad_sensing);

}  // namespace colprune
