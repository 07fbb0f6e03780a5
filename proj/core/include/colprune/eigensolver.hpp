#pragma once

#include <cstdint>
#include <functional>

#include "colprune/objectives.hpp"
#include "colprune/types.hpp"

namespace colprune {

/// Symmetric linear operator on R^n given by its action.
using LinearOperator = std::function<Vector(const Vector&)>;

struct EigenOptions {
  /// Operators of at most this dimension are materialized and solved densely.
  Index dense_limit = 400;
  /// Skip the dense path regardless of size (used to test the iterative path).
  bool force_iterative = false;
  /// Krylov basis size per cycle; 0 means 5 sqrt(n). Clamped to [20, min(n, 240)].
  Index max_basis = 0;
  /// Ritz vectors carried over at a restart.
  Index keep = 6;
  int max_restarts = 40;
  /// Converged when ||H v - theta v|| <= rel_tol * (largest |Ritz value| seen).
  double rel_tol = 1e-8;
  std::uint64_t seed = 0x5eed;
};

struct EigenResult {
  double value = 0.0;       // smallest eigenvalue estimate
  double residual = 0.0;    // ||H v - value v|| for the returned unit vector
  double norm_estimate = 0.0;
  Vector vector;
  Index products = 0;       // operator applications
  int restarts = 0;
  bool converged = false;
  bool dense = false;
};

/// Smallest eigenpair of a symmetric operator by Lanczos with full
/// reorthogonalization and thick restarts, or by a dense eigendecomposition
/// when the dimension is at most opts.dense_limit.
/// Non-convergence is reported through `converged`, never thrown.
EigenResult min_eigenpair(const LinearOperator& op, Index n, const EigenOptions& opts = {});

/// Smallest eigenpair of the Hessian of `f` at U, acting on vec(U).
EigenResult hessian_min_eigenpair(const Objective& f, const Matrix& U, const EigenOptions& opts = {});

/// Hessian at U as a dense (dk x dk) matrix assembled from HVPs on the
/// coordinate basis of vec(U) (column-major), then symmetrized.
Matrix dense_hessian(const Objective& f, const Matrix& U);

}  // namespace colprune
