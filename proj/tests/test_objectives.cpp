#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include <colprune/errors.hpp>
#include <colprune/linalg.hpp>
#include <colprune/objectives.hpp>
#include <colprune/rng.hpp>
#include <colprune/sensing.hpp>

#include "oracles.hpp"

using namespace colprune;

namespace {

struct Instance {
  GroundTruth star;
  std::shared_ptr<const SensingSet> sensing;
  std::shared_ptr<const SensingSet> quad;
  Matrix U;
  Matrix Z;
  RegParams reg;
};

Instance draw(std::uint64_t seed, double noise = 0.1) {
  Rng rng(seed);
  const Index d = 3 + static_cast<Index>(rng.uniform() * 8);
  const Index k = 2 + static_cast<Index>(rng.uniform() * 5);
  const Index r = 1 + static_cast<Index>(rng.uniform() * 3);
  Instance in;
  in.star = gen_ground_truth(d, r, r == 1 ? 1.0 : 0.5, rng);
  in.sensing = std::make_shared<const SensingSet>(measure(in.star, gen_gaussian_sensing(40, d, rng), noise, rng));
  in.quad = std::make_shared<const SensingSet>(measure(in.star, gen_rank_one_sensing(60, d, rng), noise, rng));
  in.U = rng.gaussian(d, k, 0.5);
  in.Z = rng.gaussian(d, k);
  in.Z /= in.Z.norm();
  in.reg.beta = 0.3;
  in.reg.lambda = 0.2;
  return in;
}

std::vector<ObjectivePtr> all_objectives(const Instance& in) {
  return {population_loss(in.star),
          empirical_loss(in.sensing),
          regularized(population_loss(in.star), in.reg),
          regularized(empirical_loss(in.sensing), in.reg, 0.25),
          nn_objective(in.quad, in.star.factor.squaredNorm(), in.reg, true),
          nn_objective(in.quad, in.star.factor.squaredNorm(), in.reg, false)};
}

Matrix padded(const GroundTruth& star, Index k) {
  Matrix U = Matrix::Zero(star.rows(), k);
  U.leftCols(star.rank()) = star.factor;
  return U;
}

}  // namespace

TEST(SmoothL2, Examples) {
  EXPECT_EQ(smooth_l2(Vector::Zero(3), 0.7), 0.0);
  Vector v(2);
  v << 3, 4;
  EXPECT_DOUBLE_EQ(smooth_l2(v, 0.0), 5.0);
  v << 1, 0;
  EXPECT_NEAR(smooth_l2(v, 1.0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(smooth_l2(v, -1.0), InvalidArgument);
}

TEST(RegValue, Examples) {
  EXPECT_EQ(reg_value(Matrix::Zero(3, 2), 1.0), 0.0);
  EXPECT_NEAR(reg_value(Matrix::Identity(2, 2), 1.0), std::sqrt(2.0), 1e-15);
  Rng rng(1);
  const Matrix U = rng.gaussian(5, 4);
  EXPECT_NEAR(reg_value(U, 1e-16), column_norms(U).sum(), 1e-6);
}

TEST(RegDiagonals, ZeroColumnAndBounds) {
  const Matrix Z = Matrix::Zero(3, 1);
  EXPECT_NEAR(d_diag(Z, 1.0)(0), 2.0, 1e-15);
  EXPECT_NEAR(g_diag(Z, 1.0)(0), 4.0, 1e-15);

  Rng rng(2);
  for (double beta : {0.01, 0.3, 2.0}) {
    const Matrix U = rng.gaussian(6, 8, 2.0);
    EXPECT_LE(d_diag(U, beta).maxCoeff(), 2.0 / std::sqrt(beta) * (1 + 1e-14));
    EXPECT_GT(d_diag(U, beta).minCoeff(), 0.0);
    EXPECT_GT(g_diag(U, beta).minCoeff(), 0.0);
  }
  const double beta = 0.04;
  Matrix U = Matrix::Zero(3, 1);
  U(1, 0) = 2 * std::sqrt(beta);
  EXPECT_GE(d_diag(U, beta)(0), 1.0 / U.norm());
}

TEST(RegGrad, Examples) {
  EXPECT_EQ(reg_grad(Matrix::Zero(2, 3), 1.0), Matrix::Zero(2, 3));
  Matrix U = Matrix::Zero(2, 1);
  U(0, 0) = 1;
  const Matrix g = reg_grad(U, 1.0);
  EXPECT_NEAR(g(0, 0), 3.0 / (2.0 * std::sqrt(2.0)), 1e-15);
  EXPECT_EQ(g(1, 0), 0.0);
}

TEST(RegGrad, MatchesFiniteDifferencesAndDiagonalForm) {
  Rng rng(3);
  const Matrix U = rng.gaussian(7, 4);
  const double beta = 0.3;
  const Matrix fd = oracle::fd_gradient([&](const Matrix& V) { return reg_value(V, beta); }, U);
  EXPECT_LE(oracle::rel_error(reg_grad(U, beta), fd), 1e-6);
  EXPECT_LE((reg_grad(U, beta) - U * d_diag(U, beta).asDiagonal()).norm(), 1e-14);
}

TEST(RegGrad, ColumnNormBound) {
  Rng rng(4);
  const double beta = 0.05;
  const Matrix U = rng.gaussian(5, 6);
  const Vector gn = column_norms(reg_grad(U, beta));
  const Vector un = column_norms(U);
  const Vector D = d_diag(U, beta);
  for (Index i = 0; i < U.cols(); ++i) {
    EXPECT_NEAR(gn(i), D(i) * un(i), 1e-12);
    EXPECT_LE(gn(i), 2 * un(i) / std::sqrt(beta) * (1 + 1e-12));
  }
}

TEST(RegHessQuadform, Examples) {
  Rng rng(5);
  const Matrix Z = rng.gaussian(4, 3);
  EXPECT_EQ(reg_hess_quadform(rng.gaussian(4, 3), 0.5, Matrix::Zero(4, 3)), 0.0);
  EXPECT_NEAR(reg_hess_quadform(Matrix::Zero(4, 3), 1.0, Z), 2 * Z.squaredNorm(), 1e-12);
  const Matrix U = rng.gaussian(4, 3);
  Matrix Zu = Z / Z.norm();
  const double fd = oracle::fd_second_directional([&](const Matrix& V) { return reg_value(V, 0.5); }, U, Zu);
  EXPECT_NEAR(reg_hess_quadform(U, 0.5, Zu), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  EXPECT_NEAR(frob_inner(Zu, reg_hvp(U, 0.5, Zu)), reg_hess_quadform(U, 0.5, Zu), 1e-12);
  EXPECT_THROW(reg_hess_quadform(U, 0.5, Matrix::Zero(3, 3)), DimensionError);
}

TEST(PopLoss, ScalarExampleAndGlobalMinimum) {
  const GroundTruth star = GroundTruth::from_factor(Matrix::Ones(1, 1));
  const Matrix U = Matrix::Constant(1, 1, 2.0);
  EXPECT_DOUBLE_EQ(pop_loss(U, star), 9.0);
  EXPECT_DOUBLE_EQ(pop_grad(U, star)(0, 0), 24.0);

  Rng rng(6);
  const GroundTruth s2 = gen_ground_truth(6, 2, 0.5, rng);
  const Matrix Up = padded(s2, 4);
  EXPECT_LE(pop_loss(Up, s2), 1e-28);
  EXPECT_LE(pop_grad(Up, s2).norm(), 1e-14);
  EXPECT_THROW(pop_loss(Matrix::Zero(5, 2), s2), DimensionError);
}

TEST(PopLoss, EqualsSquaredGramError) {
  Rng rng(7);
  const GroundTruth star = gen_ground_truth(8, 3, 0.5, rng);
  const Matrix U = rng.gaussian(8, 5, 0.4);
  EXPECT_NEAR(pop_loss(U, star), std::pow(gram_error(U, star), 2), 1e-12);
}

TEST(PopHessQuadform, OriginIsStrictSaddle) {
  Rng rng(8);
  const GroundTruth star = gen_ground_truth(5, 2, 0.5, rng);
  const Matrix Z = rng.gaussian(5, 3);
  const Matrix M = star.factor * star.factor.transpose();
  EXPECT_EQ(pop_hess_quadform(Matrix::Zero(5, 3), star, Matrix::Zero(5, 3)), 0.0);
  EXPECT_NEAR(pop_hess_quadform(Matrix::Zero(5, 3), star, Z), -4 * frob_inner(Z, M * Z), 1e-12);
  EXPECT_LE(pop_hess_quadform(Matrix::Zero(5, 3), star, Z), 0.0);
}

TEST(EmpLoss, SingleScaledIdentityMeasurement) {
  const Index d = 4;
  SensingSet s = SensingSet::from_matrices({Matrix::Identity(d, d) / static_cast<double>(d)});
  Vector y(1);
  y << 0.3;
  s.set_observations(y, 0.0);
  Rng rng(9);
  const Matrix U = rng.gaussian(d, 2);
  const double res = U.squaredNorm() / d - 0.3;
  EXPECT_NEAR(emp_loss(U, s), res * res, 1e-14);
}

TEST(EmpLoss, NoiselessRecoveryAndHessianAtOptimum) {
  Rng rng(10);
  const GroundTruth star = gen_ground_truth(6, 2, 0.5, rng);
  const SensingSet s = measure(star, gen_gaussian_sensing(50, 6, rng), 0.0, rng);
  const Matrix U = padded(star, 4);
  EXPECT_LE(emp_loss(U, s), 1e-26);
  const Matrix Z = rng.gaussian(6, 4);
  double want = 0;
  for (Index i = 0; i < s.size(); ++i) want += std::pow(frob_inner(s.matrix(i), U * Z.transpose() + Z * U.transpose()), 2);
  want *= 2.0 / static_cast<double>(s.size());
  EXPECT_NEAR(emp_hess_quadform(U, s, Z), want, 1e-9 * std::max(1.0, want));
  EXPECT_EQ(emp_hess_quadform(U, s, Matrix::Zero(6, 4)), 0.0);
}

TEST(EmpLoss, NormalCacheMatchesDirectEvaluation) {
  const Instance in = draw(11);
  const EmpiricalLoss cached(in.sensing, true), direct(in.sensing, false);
  EXPECT_TRUE(cached.uses_normal_cache());
  EXPECT_FALSE(direct.uses_normal_cache());
  EXPECT_NEAR(cached.value(in.U), direct.value(in.U), 1e-10 * std::max(1.0, direct.value(in.U)));
  EXPECT_LE(oracle::rel_error(cached.gradient(in.U), direct.gradient(in.U)), 1e-10);
  EXPECT_NEAR(cached.hess_quadform(in.U, in.Z), direct.hess_quadform(in.U, in.Z), 1e-9);
}

TEST(EmpLoss, RejectsUnmeasuredSensing) {
  Rng rng(12);
  const SensingSet s = gen_gaussian_sensing(5, 3, rng);
  EXPECT_THROW(emp_loss(Matrix::Zero(3, 2), s), InvalidArgument);
}

TEST(Regularized, LambdaZeroIsBase) {
  const Instance in = draw(13);
  RegParams reg = in.reg;
  reg.lambda = 0;
  for (const ObjectivePtr& base : {population_loss(in.star), empirical_loss(in.sensing)}) {
    const ObjectivePtr f = regularized(base, reg);
    EXPECT_DOUBLE_EQ(f->value(in.U), base->value(in.U));
    EXPECT_TRUE(f->gradient(in.U).isApprox(base->gradient(in.U)));
    EXPECT_DOUBLE_EQ(f->hess_quadform(in.U, in.Z), base->hess_quadform(in.U, in.Z));
  }
}

TEST(Regularized, OriginValueIsBaseValue) {
  const Instance in = draw(14);
  const ObjectivePtr base = population_loss(in.star);
  const Matrix O = Matrix::Zero(in.U.rows(), in.U.cols());
  EXPECT_DOUBLE_EQ(regularized(base, in.reg)->value(O), base->value(O));
}

TEST(Regularized, IsScaledSumOfComponents) {
  const Instance in = draw(15);
  const ObjectivePtr base = empirical_loss(in.sensing);
  const ObjectivePtr f = regularized(base, in.reg, 0.25);
  EXPECT_NEAR(f->value(in.U), 0.25 * base->value(in.U) + in.reg.lambda * reg_value(in.U, in.reg.beta), 1e-12);
}

TEST(QuadNet, ExactRecoveryIsZero) {
  Rng rng(16);
  const GroundTruth star = gen_ground_truth(5, 2, 0.5, rng);
  const auto quad = std::make_shared<const SensingSet>(measure(star, gen_rank_one_sensing(80, 5, rng), 0.0, rng));
  const Matrix U = padded(star, 3);
  RegParams reg;
  reg.lambda = 0;
  EXPECT_NEAR(nn_objective(quad, star.factor.squaredNorm(), reg)->value(U), 0.0, 1e-24);
}

TEST(QuadNet, PopulationLimitIsTwiceSquaredGramError) {
  Rng rng(17);
  const Index d = 4, k = 3;
  const GroundTruth star = gen_ground_truth(d, 2, 0.5, rng);
  const auto quad =
      std::make_shared<const SensingSet>(measure(star, gen_rank_one_sensing(50 * d * k * 20, d, rng), 0.0, rng));
  const Matrix U = rng.gaussian(d, k, 0.6);
  RegParams reg;
  reg.lambda = 0;
  const double v = nn_objective(quad, star.factor.squaredNorm(), reg)->value(U);
  const double want = 2 * std::pow(gram_error(U, star), 2);
  EXPECT_NEAR(v, want, 0.2 * want);
}

TEST(QuadNet, RejectsDenseSensingAndEstimatesFro) {
  const Instance in = draw(18, 0.0);
  EXPECT_THROW(nn_objective(in.sensing, 1.0, in.reg), InvalidArgument);
  EXPECT_THROW(estimate_fro_star(*in.sensing), InvalidArgument);
  EXPECT_NEAR(estimate_fro_star(*in.quad), in.quad->observations().mean(), 0.0);
}

// Finite-difference agreement for every objective kind over 20 random instances.
TEST(ObjectiveOracles, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const Instance in = draw(seed);
    for (const ObjectivePtr& f : all_objectives(in)) {
      const Matrix fd = oracle::fd_gradient(oracle::value_of(*f), in.U);
      EXPECT_LE(oracle::rel_error(f->gradient(in.U), fd), 1e-6) << f->describe() << " seed " << seed;
    }
  }
}

TEST(ObjectiveOracles, QuadformMatchesSecondDifference) {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const Instance in = draw(seed);
    for (const ObjectivePtr& f : all_objectives(in)) {
      const double q = f->hess_quadform(in.U, in.Z);
      const double fd = oracle::fd_second_directional(oracle::value_of(*f), in.U, in.Z);
      EXPECT_LE(std::abs(q - fd) / std::max(1.0, std::abs(q)), 1e-5) << f->describe() << " seed " << seed;
      EXPECT_NEAR(frob_inner(in.Z, f->hvp(in.U, in.Z)), q, 1e-10 * std::max(1.0, std::abs(q)));
    }
  }
}

TEST(ObjectiveOracles, HvpIsSymmetricAndMatchesGradientDifferences) {
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    const Instance in = draw(seed);
    Rng rng(seed);
    const Matrix Z1 = rng.gaussian(in.U.rows(), in.U.cols());
    const Matrix Z2 = rng.gaussian(in.U.rows(), in.U.cols());
    for (const ObjectivePtr& f : all_objectives(in)) {
      const double a = frob_inner(Z1, f->hvp(in.U, Z2));
      const double b = frob_inner(Z2, f->hvp(in.U, Z1));
      EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a))) << f->describe();
      const double h = 1e-6;
      const Matrix fd = (f->gradient(in.U + h * Z1) - f->gradient(in.U - h * Z1)) / (2 * h);
      EXPECT_LE(oracle::rel_error(f->hvp(in.U, Z1), fd), 1e-5) << f->describe();
    }
  }
}

TEST(ObjectiveOracles, PopulationGradientLipschitzSmoke) {
  Rng rng(400);
  const GroundTruth star = gen_ground_truth(8, 2, 0.5, rng);
  RegParams reg;
  reg.beta = 0.09;
  reg.lambda = 0.09;
  const ObjectivePtr f = regularized(population_loss(star), reg);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    Matrix U = rng.gaussian(8, 6);
    Matrix V = rng.gaussian(8, 6);
    U *= 3.0 * rng.uniform() / op_norm(U);
    V *= 3.0 * rng.uniform() / op_norm(V);
    worst = std::max(worst, (f->gradient(U) - f->gradient(V)).norm() / (U - V).norm());
  }
  EXPECT_LT(worst, 200.0);
}

TEST(RegParamsCheck, ValidateRejectsBadValues) {
  RegParams p;
  p.beta = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.beta = 1;
  p.lambda = -1;
  EXPECT_THROW(p.validate(), InvalidArgument);
}
