#include "colprune/linalg.hpp"

#include <cmath>
#include <string>

#include "colprune/errors.hpp"

namespace colprune {

void require_factor(const Matrix& U, std::string_view what) {
  if (U.rows() < 1 || U.cols() < 1) {
    throw DimensionError(std::string(what) + " must have at least one row and one column");
  }
  if (!U.allFinite()) {
    throw InvalidArgument(std::string(what) + " has non-finite entries");
  }
}

GroundTruth GroundTruth::from_factor(Matrix factor) {
  require_factor(factor, "ground-truth factor");
  if (factor.cols() > factor.rows()) {
    throw DimensionError("ground-truth rank exceeds the ambient dimension");
  }
  Eigen::JacobiSVD<Matrix> svd(factor);
  Vector s = svd.singularValues();
  if (s(s.size() - 1) <= 0.0) {
    throw DimensionError("ground-truth factor is rank deficient");
  }
  return GroundTruth{std::move(factor), std::move(s)};
}

Vector column_norms(const Matrix& U) { return U.colwise().norm().transpose(); }

double op_norm(const Matrix& U, const OpNormOptions& opts) {
  if (U.size() == 0) return 0.0;
  // Both paths work on the smaller Gram matrix; its top eigenvalue is accurate
  // to relative machine precision, which is all the norm needs.
  const Matrix G = U.cols() <= U.rows() ? Matrix(U.transpose() * U) : Matrix(U * U.transpose());
  if (G.rows() <= opts.dense_limit) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(eig.eigenvalues()(G.rows() - 1), 0.0));
  }

  Index start = 0;
  G.diagonal().maxCoeff(&start);
  if (G(start, start) == 0.0) return 0.0;
  Vector v = G.col(start);
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Vector w = G * v;
    const double lambda = v.dot(w);
    const double residual = (w - lambda * v).norm();
    const double w_norm = w.norm();
    if (w_norm == 0.0) return 0.0;
    if (residual <= opts.rel_tol * lambda || (it > 0 && std::abs(lambda - prev) <= 1e-15 * lambda)) {
      return std::sqrt(lambda);
    }
    prev = lambda;
    v = w / w_norm;
  }
  throw ConvergenceError("op_norm: power iteration did not converge in " +
                         std::to_string(opts.max_iters) + " iterations");
}

double gram_distance(const Matrix& U, const Matrix& V) {
  if (U.rows() != V.rows()) {
    throw DimensionError("gram_distance: row mismatch (" + std::to_string(U.rows()) + " vs " +
                         std::to_string(V.rows()) + ")");
  }
  const Index d = U.rows();
  const Index m = U.cols() + V.cols();
  if (d <= m) {
    const Matrix diff = U * U.transpose() - V * V.transpose();
    return diff.norm();
  }
  Matrix W(d, m);
  W << U, V;
  Eigen::HouseholderQR<Matrix> qr(W);
  const Matrix R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const Matrix R1 = R.leftCols(U.cols());
  const Matrix R2 = R.rightCols(V.cols());
  const Matrix core = R1 * R1.transpose() - R2 * R2.transpose();
  return core.norm();
}

double gram_error(const Matrix& U, const GroundTruth& star) { return gram_distance(U, star.factor); }

double gram_error_trace_identity(const Matrix& U, const GroundTruth& star) {
  if (U.rows() != star.rows()) throw DimensionError("gram_error: row mismatch");
  const double a = (U.transpose() * U).squaredNorm();
  const double b = (star.factor.transpose() * U).squaredNorm();
  const double c = (star.factor.transpose() * star.factor).squaredNorm();
  return std::sqrt(std::max(0.0, a - 2.0 * b + c));
}

Matrix column_cosines(const Matrix& U) {
  constexpr double kZeroNorm = 1e-14;
  const Vector norms = column_norms(U);
  Vector inv = Vector::Zero(norms.size());
  for (Index i = 0; i < norms.size(); ++i) {
    if (norms(i) >= kZeroNorm) inv(i) = 1.0 / norms(i);
  }
  Matrix C = inv.asDiagonal() * (U.transpose() * U) * inv.asDiagonal();
  for (Index i = 0; i < C.rows(); ++i) {
    if (inv(i) != 0.0) C(i, i) = 1.0;
  }
  return C.cwiseMax(-1.0).cwiseMin(1.0);
}

double max_offdiag_cosine(const Matrix& U) {
  const Matrix C = column_cosines(U);
  double worst = 0.0;
  for (Index j = 0; j < C.cols(); ++j) {
    for (Index i = 0; i < j; ++i) worst = std::max(worst, std::abs(C(i, j)));
  }
  return worst;
}

Matrix project_op_norm_ball(const Matrix& P, double cap) {
  if (P.norm() <= cap) return P;  // ||P||_op <= ||P||_F
  Eigen::JacobiSVD<Matrix> svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().size() == 0 || svd.singularValues()(0) <= cap) return P;
  const Vector clipped = svd.singularValues().cwiseMin(cap);
  return svd.matrixU() * clipped.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace colprune

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace colprune {

bool enable_flush_to_zero() {
#if defined(__SSE2__)
  _mm_setcsr(_mm_getcsr() | 0x8040);
  return true;
#else
  return false;
#endif
}

}  // namespace colprune
