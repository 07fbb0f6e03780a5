#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include <colprune/errors.hpp>
#include <colprune/linalg.hpp>
#include <colprune/rng.hpp>
#include <colprune/sensing.hpp>

#include "oracles.hpp"

using namespace colprune;

TEST(ColumnNorms, ZeroMatrix) {
  const Vector n = column_norms(Matrix::Zero(3, 2));
  EXPECT_EQ(n.size(), 2);
  EXPECT_EQ(n(0), 0.0);
  EXPECT_EQ(n(1), 0.0);
}

TEST(ColumnNorms, IdentityAndThreeFourFive) {
  EXPECT_TRUE(column_norms(Matrix::Identity(2, 2)).isApprox(Vector::Ones(2)));
  Matrix U(2, 2);
  U << 3, 1, 4, 0;
  EXPECT_DOUBLE_EQ(column_norms(U)(0), 5.0);
}

TEST(ColumnNorms, ScaleEquivariance) {
  Rng rng(7);
  const Matrix U = rng.gaussian(6, 4);
  for (double c : {-2.5, 0.0, 3.0}) {
    EXPECT_TRUE((column_norms(c * U) - std::abs(c) * column_norms(U)).norm() <= 1e-12);
  }
}

TEST(RequireFactor, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(require_factor(Matrix(0, 3)), DimensionError);
  Matrix U = Matrix::Ones(2, 2);
  U(1, 1) = std::nan("");
  EXPECT_THROW(require_factor(U), InvalidArgument);
}

TEST(OpNorm, SmallExamples) {
  EXPECT_NEAR(op_norm(Matrix::Identity(2, 2)), 1.0, 1e-14);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 2;
  D(1, 1) = 1;
  EXPECT_NEAR(op_norm(D), 2.0, 1e-14);
}

TEST(OpNorm, MatchesDenseSvd) {
  Rng rng(11);
  const Matrix U = rng.gaussian(8, 5);
  EXPECT_NEAR(op_norm(U), oracle::dense_op_norm(U), 1e-8);
}

TEST(OpNorm, PowerIterationPathMatchesSvd) {
  Rng rng(12);
  const Matrix U = rng.gaussian(120, 90);
  OpNormOptions opts;
  opts.dense_limit = 10;  // force power iteration
  EXPECT_NEAR(op_norm(U, opts), oracle::dense_op_norm(U), 1e-7 * oracle::dense_op_norm(U));
}

TEST(OpNorm, FrobeniusSandwich) {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const Matrix U = rng.gaussian(7, 5);
    const double op = op_norm(U);
    EXPECT_LE(op, U.norm() * (1 + 1e-12));
    EXPECT_LE(U.norm(), std::sqrt(5.0) * op * (1 + 1e-12));
  }
}

TEST(GramError, ExactRecoveryWithPadding) {
  Rng rng(3);
  const GroundTruth star = gen_ground_truth(6, 2, 0.5, rng);
  Matrix U = Matrix::Zero(6, 4);
  U.leftCols(2) = star.factor;
  EXPECT_LE(gram_error(U, star), 1e-14);
}

TEST(GramError, ZeroModelAgainstUnitRankOne) {
  Rng rng(4);
  const GroundTruth star = gen_ground_truth(5, 1, 1.0, rng);
  EXPECT_NEAR(gram_error(Matrix::Zero(5, 3), star), 1.0, 1e-12);
}

TEST(GramError, MatchesExplicitDenseEvaluation) {
  Rng rng(5);
  const GroundTruth star = gen_ground_truth(6, 2, 0.5, rng);
  const Matrix U = rng.gaussian(6, 4, 0.5);
  const double want = oracle::explicit_gram_error(U, star.factor);
  EXPECT_NEAR(gram_error(U, star), want, 1e-10);
  EXPECT_NEAR(gram_error_trace_identity(U, star), want, 1e-8);
}

TEST(GramError, RotationInvariant) {
  Rng rng(6);
  const GroundTruth star = gen_ground_truth(9, 3, 0.5, rng);
  for (int t = 0; t < 10; ++t) {
    const Matrix U = rng.gaussian(9, 5, 0.4);
    const Matrix Q = rng.haar_orthonormal(5, 5);
    EXPECT_NEAR(gram_error(U * Q, star), gram_error(U, star), 1e-9);
  }
}

TEST(GramDistance, LargeDimensionMatchesExplicit) {
  Rng rng(8);
  const Matrix U = rng.gaussian(200, 3);
  const Matrix V = rng.gaussian(200, 2);
  EXPECT_NEAR(gram_distance(U, V), (U * U.transpose() - V * V.transpose()).norm(), 1e-9);
}

TEST(ColumnCosines, OrthonormalGivesIdentity) {
  Rng rng(9);
  const Matrix Q = rng.haar_orthonormal(6, 4);
  EXPECT_TRUE(column_cosines(Q).isApprox(Matrix::Identity(4, 4), 1e-12));
}

TEST(ColumnCosines, DuplicateAndHandExample) {
  Matrix U(2, 3);
  U << 1, 1, 1, 0, 0, 1;
  const Matrix C = column_cosines(U);
  EXPECT_NEAR(C(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(C(0, 2), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(ColumnCosines, ZeroColumnGivesZeroNotNan) {
  Matrix U = Matrix::Zero(3, 2);
  U(0, 0) = 1;
  const Matrix C = column_cosines(U);
  EXPECT_EQ(C(0, 1), 0.0);
  EXPECT_EQ(C(1, 1), 0.0);
  EXPECT_EQ(C(0, 0), 1.0);
}

TEST(ColumnCosines, InvariantUnderPositiveRescaling) {
  Rng rng(10);
  const Matrix U = rng.gaussian(5, 4);
  Vector s(4);
  s << 0.1, 3.0, 7.5, 1e-3;
  EXPECT_TRUE((column_cosines(U * s.asDiagonal()) - column_cosines(U)).norm() < 1e-12);
}

TEST(MaxOffdiagCosine, SingleColumnIsZero) { EXPECT_EQ(max_offdiag_cosine(Matrix::Ones(3, 1)), 0.0); }

TEST(ProjectOpNormBall, ClipsSingularValues) {
  Rng rng(14);
  const Matrix P = rng.gaussian(6, 4, 3.0);
  const Matrix Q = project_op_norm_ball(P, 1.0);
  EXPECT_NEAR(oracle::dense_op_norm(Q), 1.0, 1e-12);
  const Matrix small = 0.1 * P / oracle::dense_op_norm(P);
  EXPECT_TRUE(project_op_norm_ball(small, 1.0).isApprox(small));
}

TEST(Rng, IdenticalSeedsGiveIdenticalStreams) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng c(42), d(42);
  EXPECT_EQ(c.gaussian(4, 3), d.gaussian(4, 3));
}

TEST(Rng, SplitStreamsDifferAndLeaveParentUntouched) {
  Rng root(1);
  Rng before(1);
  Rng s0 = root.split(0), s1 = root.split(1), s0b = root.split(0);
  EXPECT_EQ(s0.seed(), s0b.seed());
  EXPECT_NE(s0.seed(), s1.seed());
  EXPECT_EQ(root.next_u64(), before.next_u64());
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(root.split(i).seed());
  EXPECT_EQ(seeds.size(), 1000u);
}

TEST(Rng, UniformBallStaysInside) {
  Rng rng(15);
  for (int i = 0; i < 200; ++i) EXPECT_LE(rng.uniform_frobenius_ball(4, 3, 0.7).norm(), 0.7 + 1e-15);
}

TEST(Rng, HaarColumnsOrthonormal) {
  Rng rng(16);
  const Matrix Q = rng.haar_orthonormal(10, 4);
  EXPECT_TRUE((Q.transpose() * Q).isApprox(Matrix::Identity(4, 4), 1e-12));
}

TEST(GroundTruthType, FromFactorComputesSpectrumAndRejectsDeficient) {
  Matrix F = Matrix::Zero(4, 2);
  F(0, 0) = 2;
  F(1, 1) = 0.5;
  const GroundTruth g = GroundTruth::from_factor(F);
  EXPECT_NEAR(g.sigma_1(), 2.0, 1e-12);
  EXPECT_NEAR(g.sigma_r_star(), 0.5, 1e-12);
  F(1, 1) = 0;
  EXPECT_THROW(GroundTruth::from_factor(F), DimensionError);
}

TEST(FlushToZero, SubnormalsFlushAfterEnabling) {
  enable_flush_to_zero();
  volatile double tiny = 1e-300;
  volatile double r = tiny * 1e-20;
#if defined(__SSE2__)
  EXPECT_EQ(r, 0.0);
#else
  (void)r;
#endif
}
