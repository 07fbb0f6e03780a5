#pragma once

#include <string_view>

#include "colprune/types.hpp"

namespace colprune {

/// Throws DimensionError/InvalidArgument unless U is non-empty and finite.
void require_factor(const Matrix& U, std::string_view what = "U");

/// Euclidean norm of every column.
Vector column_norms(const Matrix& U);

struct OpNormOptions {
  /// Up to this min(d, k) the top eigenvalue of the Gram matrix is computed
  /// densely; above it by power iteration.
  Index dense_limit = 64;
  double rel_tol = 1e-9;
  int max_iters = 20000;
};

/// Largest singular value. Uses a dense SVD for small matrices and power
/// iteration on the smaller Gram matrix otherwise; throws ConvergenceError
/// if the power iteration does not settle within the cap.
double op_norm(const Matrix& U, const OpNormOptions& opts = {});

/// ||U U^T - V V^T||_F without forming a d x d matrix when d exceeds the
/// combined width. The difference is W S W^T with W = [U V], S = diag(I, -I);
/// after W = QR it equals ||R S R^T||_F, which avoids the cancellation of the
/// trace expansion near zero.
double gram_distance(const Matrix& U, const Matrix& V);

/// ||U U^T - U* U*^T||_F (unsquared).
double gram_error(const Matrix& U, const GroundTruth& star);

/// Same quantity through tr((UU^T - X*)^2) = ||U^T U||^2 - 2||U*^T U||^2 +
/// ||U*^T U*||^2. Cheap but loses about half the digits near zero; kept as a
/// cross-check.
double gram_error_trace_identity(const Matrix& U, const GroundTruth& star);

/// k x k matrix of pairwise column cosines. Columns with norm below 1e-14
/// give cosine 0 against everything, including themselves.
Matrix column_cosines(const Matrix& U);

/// Largest |cosine| over distinct column pairs (0 for k < 2).
double max_offdiag_cosine(const Matrix& U);

/// Frobenius inner product <A, B>.
inline double frob_inner(const Matrix& A, const Matrix& B) { return (A.array() * B.array()).sum(); }

/// Clips singular values of P at `cap`, i.e. the projection onto the
/// operator-norm ball. Returns P unchanged if already inside.
Matrix project_op_norm_ball(const Matrix& P, double cap);

}  // namespace colprune

namespace colprune {

/// Sets flush-to-zero and denormals-are-zero on the calling thread (x86 only;
/// a no-op elsewhere). Pruned columns decay geometrically toward zero under
/// the regularizer and would otherwise spend most of a long run in subnormal
/// arithmetic. Returns true when the mode was changed.
bool enable_flush_to_zero();

}  // namespace colprune
