#pragma once

// Brute-force reference implementations used to check the library: central
// finite differences, dense eigendecompositions and explicit d x d products.

#include <functional>

#include <Eigen/Dense>

#include <colprune/objectives.hpp>
#include <colprune/types.hpp>

namespace oracle {

using colprune::Index;
using colprune::Matrix;
using colprune::Vector;

using ScalarFn = std::function<double(const Matrix&)>;
using GradFn = std::function<Matrix(const Matrix&)>;

inline Matrix fd_gradient(const ScalarFn& f, const Matrix& U, double h = 1e-6) {
  Matrix g(U.rows(), U.cols());
  Matrix V = U;
  for (Index j = 0; j < U.cols(); ++j) {
    for (Index i = 0; i < U.rows(); ++i) {
      const double u = V(i, j);
      V(i, j) = u + h;
      const double fp = f(V);
      V(i, j) = u - h;
      const double fm = f(V);
      V(i, j) = u;
      g(i, j) = (fp - fm) / (2 * h);
    }
  }
  return g;
}

/// d^2/dt^2 f(U + t Z) at t = 0.
inline double fd_second_directional(const ScalarFn& f, const Matrix& U, const Matrix& Z, double h = 1e-4) {
  return (f(U + h * Z) - 2 * f(U) + f(U - h * Z)) / (h * h);
}

/// Symmetrized Jacobian of the gradient, vec(U) column-major ordering.
inline Matrix fd_hessian(const GradFn& grad, const Matrix& U, double h = 1e-5) {
  const Index n = U.size();
  Matrix H(n, n);
  for (Index c = 0; c < n; ++c) {
    Matrix E = Matrix::Zero(U.rows(), U.cols());
    E(c % U.rows(), c / U.rows()) = h;
    const Matrix diff = (grad(U + E) - grad(U - E)) / (2 * h);
    H.col(c) = Eigen::Map<const Vector>(diff.data(), n);
  }
  return 0.5 * (H + H.transpose());
}

inline double dense_min_eig(const Matrix& H) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(H, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

inline double dense_op_norm(const Matrix& U) {
  return Eigen::JacobiSVD<Matrix>(U).singularValues()(0);
}

inline double explicit_gram_error(const Matrix& U, const Matrix& Ustar) {
  return (U * U.transpose() - Ustar * Ustar.transpose()).norm();
}

inline ScalarFn value_of(const colprune::Objective& f) {
  return [&f](const Matrix& U) { return f.value(U); };
}
inline GradFn gradient_of(const colprune::Objective& f) {
  return [&f](const Matrix& U) { return f.gradient(U); };
}

inline double rel_error(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

}  // namespace oracle
