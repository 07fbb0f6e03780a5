#pragma once

#include <Eigen/Dense>

namespace colprune {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// The learner's model U (d x k). Columns are the pruning groups; storage is
/// Eigen's default column-major layout.
using FactorMatrix = Matrix;

/// Ground-truth factor U* (d x r) together with its singular values.
struct GroundTruth {
  Matrix factor;
  Vector singular_values;  // nonincreasing, all positive

  Index rows() const { return factor.rows(); }
  Index rank() const { return factor.cols(); }
  double sigma_1() const { return singular_values(0); }
  double sigma_r_star() const { return singular_values(singular_values.size() - 1); }

  /// Builds a ground truth from an explicit factor, computing its spectrum.
  /// Throws DimensionError when the factor is rank deficient.
  static GroundTruth from_factor(Matrix factor);
};

}  // namespace colprune
