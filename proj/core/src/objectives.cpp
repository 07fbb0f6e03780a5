#include "colprune/objectives.hpp"

#include <cmath>
#include <sstream>

#include "colprune/errors.hpp"
#include "colprune/linalg.hpp"

namespace colprune {

namespace {

void require_same_shape(const Matrix& U, const Matrix& Z) {
  if (U.rows() != Z.rows() || U.cols() != Z.cols()) {
    throw DimensionError("direction must have the shape of U");
  }
}

void require_rows(const Matrix& U, Index d) {
  if (U.rows() != d) {
    throw DimensionError("U has " + std::to_string(U.rows()) + " rows, objective expects " +
                         std::to_string(d));
  }
}

void require_measured(const SensingSet& s) {
  if (!s.measured()) throw InvalidArgument("sensing set has no observations");
  if (s.size() == 0) throw InvalidArgument("sensing set is empty");
}

// tr(M^2) for square M.
double trace_of_square(const Matrix& M) { return (M.array() * M.transpose().array()).sum(); }

}  // namespace

bool RegParams::within_smoothness_regime() const {
  return lambda <= std::min(beta, std::sqrt(beta));
}

void RegParams::validate() const {
  if (!(std::isfinite(lambda) && lambda >= 0.0)) throw InvalidArgument("lambda must be finite and >= 0");
  if (!(std::isfinite(beta) && beta > 0.0)) throw InvalidArgument("beta must be finite and > 0");
  if (!(std::isfinite(epsilon) && epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (!(std::isfinite(gamma) && gamma > 0.0)) throw InvalidArgument("gamma must be > 0");
}

// --- regularizer -----------------------------------------------------------

double smooth_l2(const Eigen::Ref<const Vector>& v, double beta) {
  if (beta < 0.0) throw InvalidArgument("beta must be >= 0");
  const double s = v.squaredNorm();
  if (s == 0.0) return 0.0;
  return s / std::sqrt(s + beta);
}

double reg_value(const Matrix& U, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be > 0");
  double total = 0.0;
  for (Index i = 0; i < U.cols(); ++i) {
    const double s = U.col(i).squaredNorm();
    total += s / std::sqrt(s + beta);
  }
  return total;
}

Vector d_diag(const Matrix& U, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be > 0");
  Vector D(U.cols());
  for (Index i = 0; i < U.cols(); ++i) {
    const double s = U.col(i).squaredNorm();
    D(i) = (s + 2.0 * beta) / std::pow(s + beta, 1.5);
  }
  return D;
}

Vector g_diag(const Matrix& U, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be > 0");
  Vector G(U.cols());
  for (Index i = 0; i < U.cols(); ++i) {
    const double s = U.col(i).squaredNorm();
    G(i) = (s + 4.0 * beta) / std::pow(s + beta, 2.5);
  }
  return G;
}

Matrix reg_grad(const Matrix& U, double beta) { return U * d_diag(U, beta).asDiagonal(); }

double reg_hess_quadform(const Matrix& U, double beta, const Matrix& Z) {
  require_same_shape(U, Z);
  const Vector D = d_diag(U, beta);
  const Vector G = g_diag(U, beta);
  double q = 0.0;
  for (Index i = 0; i < U.cols(); ++i) {
    const double c = U.col(i).dot(Z.col(i));
    q += D(i) * Z.col(i).squaredNorm() - G(i) * c * c;
  }
  return q;
}

Matrix reg_hvp(const Matrix& U, double beta, const Matrix& Z) {
  require_same_shape(U, Z);
  const Vector D = d_diag(U, beta);
  const Vector G = g_diag(U, beta);
  Matrix out(Z.rows(), Z.cols());
  for (Index i = 0; i < U.cols(); ++i) {
    const double c = U.col(i).dot(Z.col(i));
    out.col(i) = D(i) * Z.col(i) - (G(i) * c) * U.col(i);
  }
  return out;
}

// --- population ------------------------------------------------------------

double pop_loss(const Matrix& U, const GroundTruth& star) {
  require_rows(U, star.rows());
  const double e = gram_distance(U, star.factor);
  return e * e;
}

Matrix pop_grad(const Matrix& U, const GroundTruth& star) {
  require_rows(U, star.rows());
  const Matrix& S = star.factor;
  return 4.0 * (U * (U.transpose() * U) - S * (S.transpose() * U));
}

double pop_hess_quadform(const Matrix& U, const GroundTruth& star, const Matrix& Z) {
  require_rows(U, star.rows());
  require_same_shape(U, Z);
  const Matrix UtZ = U.transpose() * Z;
  const Matrix StZ = star.factor.transpose() * Z;
  const double curvature = UtZ.squaredNorm() - StZ.squaredNorm();
  const double sym = 2.0 * frob_inner(U.transpose() * U, Z.transpose() * Z) + 2.0 * trace_of_square(UtZ);
  return 4.0 * curvature + 2.0 * sym;
}

Matrix pop_hvp(const Matrix& U, const GroundTruth& star, const Matrix& Z) {
  require_rows(U, star.rows());
  require_same_shape(U, Z);
  const Matrix& S = star.factor;
  const Matrix UtZ = U.transpose() * Z;
  return 4.0 * (U * UtZ.transpose() + Z * (U.transpose() * U) + U * UtZ - S * (S.transpose() * Z));
}

// --- empirical -------------------------------------------------------------

double emp_loss(const Matrix& U, const SensingSet& sensing) {
  require_measured(sensing);
  require_rows(U, sensing.dim());
  const Vector res = sensing.measure_gram(U) - sensing.observations();
  return res.squaredNorm() / static_cast<double>(sensing.size());
}

Matrix emp_grad(const Matrix& U, const SensingSet& sensing) {
  require_measured(sensing);
  require_rows(U, sensing.dim());
  const Vector res = sensing.measure_gram(U) - sensing.observations();
  return (4.0 / static_cast<double>(sensing.size())) * sensing.adjoint_times(res, U);
}

double emp_hess_quadform(const Matrix& U, const SensingSet& sensing, const Matrix& Z) {
  require_measured(sensing);
  require_rows(U, sensing.dim());
  require_same_shape(U, Z);
  const double n = static_cast<double>(sensing.size());
  const Vector res = sensing.measure_gram(U) - sensing.observations();
  const Vector cross = sensing.measure_cross(U, Z);
  return (2.0 / n) * cross.squaredNorm() + (4.0 / n) * res.dot(sensing.measure_gram(Z));
}

Matrix emp_hvp(const Matrix& U, const SensingSet& sensing, const Matrix& Z) {
  require_measured(sensing);
  require_rows(U, sensing.dim());
  require_same_shape(U, Z);
  const double n = static_cast<double>(sensing.size());
  const Vector res = sensing.measure_gram(U) - sensing.observations();
  const Vector cross = sensing.measure_cross(U, Z);
  return (4.0 / n) * (sensing.adjoint_times(cross, U) + sensing.adjoint_times(res, Z));
}

// --- objective classes -----------------------------------------------------

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::population: return "population";
    case ObjectiveKind::empirical: return "empirical";
    case ObjectiveKind::quadratic_network: return "quadratic_network";
  }
  return "unknown";
}

PopulationLoss::PopulationLoss(GroundTruth star) : star_(std::move(star)) {
  require_factor(star_.factor, "U*");
}

double PopulationLoss::value(const Matrix& U) const { return pop_loss(U, star_); }
Matrix PopulationLoss::gradient(const Matrix& U) const { return pop_grad(U, star_); }
double PopulationLoss::hess_quadform(const Matrix& U, const Matrix& Z) const {
  return pop_hess_quadform(U, star_, Z);
}
Matrix PopulationLoss::hvp(const Matrix& U, const Matrix& Z) const { return pop_hvp(U, star_, Z); }

std::string PopulationLoss::describe() const {
  std::ostringstream os;
  os << "population(d=" << star_.rows() << ", r=" << star_.rank() << ")";
  return os.str();
}

EmpiricalLoss::EmpiricalLoss(std::shared_ptr<const SensingSet> sensing, bool use_normal_cache)
    : sensing_(std::move(sensing)) {
  if (!sensing_) throw InvalidArgument("empirical loss needs a sensing set");
  require_measured(*sensing_);
  const SensingSet& s = *sensing_;
  if (use_normal_cache && s.kind() == SensingKind::dense_gaussian && s.size() > s.packed_dim()) {
    const double n = static_cast<double>(s.size());
    normal_ = Matrix::Zero(s.packed_dim(), s.packed_dim());
    normal_.selfadjointView<Eigen::Lower>().rankUpdate(s.packed().transpose(), 1.0 / n);
    normal_.triangularView<Eigen::StrictlyUpper>() = normal_.transpose();
    moment_ = s.packed().transpose() * s.observations() / n;
    cached_ = true;
  }
}

Matrix EmpiricalLoss::residual_operator(const Matrix& U) const {
  const Vector q = 0.5 * pack_symmetrized_product(U, U);
  return unpack_upper(normal_ * q - moment_, sensing_->dim());
}

double EmpiricalLoss::value(const Matrix& U) const { return emp_loss(U, *sensing_); }

Matrix EmpiricalLoss::gradient(const Matrix& U) const {
  if (!cached_) return emp_grad(U, *sensing_);
  require_rows(U, sensing_->dim());
  return 4.0 * residual_operator(U) * U;
}

double EmpiricalLoss::hess_quadform(const Matrix& U, const Matrix& Z) const {
  if (!cached_) return emp_hess_quadform(U, *sensing_, Z);
  require_rows(U, sensing_->dim());
  require_same_shape(U, Z);
  const Vector qdot = pack_symmetrized_product(U, Z);
  const Matrix M = residual_operator(U);
  return 2.0 * qdot.dot(normal_ * qdot) + 4.0 * frob_inner(M * Z, Z);
}

Matrix EmpiricalLoss::hvp(const Matrix& U, const Matrix& Z) const {
  if (!cached_) return emp_hvp(U, *sensing_, Z);
  require_rows(U, sensing_->dim());
  require_same_shape(U, Z);
  const Vector qdot = pack_symmetrized_product(U, Z);
  const Matrix Mdot = unpack_upper(normal_ * qdot, sensing_->dim());
  return 4.0 * (Mdot * U + residual_operator(U) * Z);
}

std::string EmpiricalLoss::describe() const {
  std::ostringstream os;
  os << "empirical(" << to_string(sensing_->kind()) << ", n=" << sensing_->size()
     << ", d=" << sensing_->dim() << (cached_ ? ", normal-cache" : "") << ")";
  return os.str();
}

QuadNetLoss::QuadNetLoss(std::shared_ptr<const SensingSet> sensing, double fro_star, bool correction)
    : sensing_(std::move(sensing)), fro_star_(fro_star), correction_(correction) {
  if (!sensing_) throw InvalidArgument("quadratic network loss needs a sensing set");
  if (sensing_->kind() != SensingKind::rank_one) {
    throw InvalidArgument("quadratic network loss needs rank-one measurements");
  }
  require_measured(*sensing_);
  if (!std::isfinite(fro_star_)) throw InvalidArgument("fro_star must be finite");
}

double QuadNetLoss::value(const Matrix& U) const {
  double v = emp_loss(U, *sensing_);
  if (correction_) {
    const double t = U.squaredNorm() - fro_star_;
    v -= t * t;
  }
  return v;
}

Matrix QuadNetLoss::gradient(const Matrix& U) const {
  Matrix g = emp_grad(U, *sensing_);
  if (correction_) g -= 4.0 * (U.squaredNorm() - fro_star_) * U;
  return g;
}

double QuadNetLoss::hess_quadform(const Matrix& U, const Matrix& Z) const {
  double q = emp_hess_quadform(U, *sensing_, Z);
  if (correction_) {
    const double uz = frob_inner(U, Z);
    q -= 8.0 * uz * uz + 4.0 * (U.squaredNorm() - fro_star_) * Z.squaredNorm();
  }
  return q;
}

Matrix QuadNetLoss::hvp(const Matrix& U, const Matrix& Z) const {
  Matrix h = emp_hvp(U, *sensing_, Z);
  if (correction_) h -= 8.0 * frob_inner(U, Z) * U + 4.0 * (U.squaredNorm() - fro_star_) * Z;
  return h;
}

std::string QuadNetLoss::describe() const {
  std::ostringstream os;
  os << "quadratic_network(n=" << sensing_->size() << ", d=" << sensing_->dim()
     << ", fro_star=" << fro_star_ << (correction_ ? "" : ", uncorrected") << ")";
  return os.str();
}

Regularized::Regularized(ObjectivePtr base, RegParams reg, double loss_scale)
    : base_(std::move(base)), reg_(reg), loss_scale_(loss_scale) {
  if (!base_) throw InvalidArgument("regularized objective needs a base loss");
  reg_.validate();
  if (!(std::isfinite(loss_scale_) && loss_scale_ > 0.0)) throw InvalidArgument("loss_scale must be > 0");
}

double Regularized::value(const Matrix& U) const {
  double v = loss_scale_ * base_->value(U);
  if (reg_.lambda > 0.0) v += reg_.lambda * reg_value(U, reg_.beta);
  return v;
}

Matrix Regularized::gradient(const Matrix& U) const {
  Matrix g = base_->gradient(U);
  if (loss_scale_ != 1.0) g *= loss_scale_;
  if (reg_.lambda > 0.0) g += reg_.lambda * reg_grad(U, reg_.beta);
  return g;
}

double Regularized::hess_quadform(const Matrix& U, const Matrix& Z) const {
  double q = loss_scale_ * base_->hess_quadform(U, Z);
  if (reg_.lambda > 0.0) q += reg_.lambda * reg_hess_quadform(U, reg_.beta, Z);
  return q;
}

Matrix Regularized::hvp(const Matrix& U, const Matrix& Z) const {
  Matrix h = base_->hvp(U, Z);
  if (loss_scale_ != 1.0) h *= loss_scale_;
  if (reg_.lambda > 0.0) h += reg_.lambda * reg_hvp(U, reg_.beta, Z);
  return h;
}

std::string Regularized::describe() const {
  std::ostringstream os;
  if (loss_scale_ != 1.0) os << loss_scale_ << " * ";
  os << base_->describe() << " + " << reg_.lambda << " * R_beta(beta=" << reg_.beta << ")";
  return os.str();
}

ObjectivePtr population_loss(GroundTruth star) { return std::make_shared<PopulationLoss>(std::move(star)); }

ObjectivePtr empirical_loss(std::shared_ptr<const SensingSet> sensing) {
  return std::make_shared<EmpiricalLoss>(std::move(sensing));
}

ObjectivePtr regularized(ObjectivePtr base, const RegParams& reg, double loss_scale) {
  return std::make_shared<Regularized>(std::move(base), reg, loss_scale);
}

ObjectivePtr nn_objective(std::shared_ptr<const SensingSet> quad_sensing, double fro_star,
                          const RegParams& reg, bool correction) {
  auto base = std::make_shared<QuadNetLoss>(std::move(quad_sensing), fro_star, correction);
  return regularized(std::move(base), reg);
}

double estimate_fro_star(const SensingSet& quad_sensing) {
  require_measured(quad_sensing);
  if (quad_sensing.kind() != SensingKind::rank_one) {
    throw InvalidArgument("estimate_fro_star needs rank-one measurements");
  }
  return quad_sensing.observations().mean();
}

}  // namespace colprune
