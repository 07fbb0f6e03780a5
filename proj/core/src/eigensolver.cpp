#include "colprune/eigensolver.hpp"

#include <algorithm>
#include <cmath>

#include "colprune/errors.hpp"
#include "colprune/rng.hpp"

namespace colprune {

namespace {

Matrix as_factor(const Vector& v, Index d, Index k) { return Eigen::Map<const Matrix>(v.data(), d, k); }

Vector as_vector(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

EigenResult dense_solve(const LinearOperator& op, Index n) {
  Matrix H(n, n);
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e(j) = 1.0;
    H.col(j) = op(e);
    e(j) = 0.0;
  }
  H = 0.5 * (H + H.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
  EigenResult out;
  out.dense = true;
  out.products = n;
  out.value = es.eigenvalues()(0);
  out.vector = es.eigenvectors().col(0);
  out.residual = (H * out.vector - out.value * out.vector).norm();
  out.norm_estimate = es.eigenvalues().cwiseAbs().maxCoeff();
  out.converged = true;
  return out;
}

// Orthogonalize v against the first m columns of V twice; returns the
// remaining norm.
double orthogonalize(Vector& v, const Matrix& V, Index m) {
  for (int pass = 0; pass < 2; ++pass) {
    if (m == 0) break;
    const Vector c = V.leftCols(m).transpose() * v;
    v.noalias() -= V.leftCols(m) * c;
  }
  return v.norm();
}

}  // namespace

EigenResult min_eigenpair(const LinearOperator& op, Index n, const EigenOptions& opts) {
  if (n <= 0) throw InvalidArgument("min_eigenpair: empty operator");
  if (!opts.force_iterative && n <= opts.dense_limit) return dense_solve(op, n);

  Index m_max = opts.max_basis > 0
                    ? opts.max_basis
                    : static_cast<Index>(std::ceil(5.0 * std::sqrt(static_cast<double>(n))));
  m_max = std::clamp<Index>(m_max, std::min<Index>(20, n), std::min<Index>(n, 240));
  const Index keep = std::clamp<Index>(opts.keep, 1, std::max<Index>(1, m_max - 2));

  Matrix V(n, m_max);  // orthonormal basis
  Matrix W(n, m_max);  // W = H V
  Matrix T = Matrix::Zero(m_max, m_max);  // V^T H V
  Index m = 0;

  Rng rng(opts.seed);
  Vector next(n);
  for (Index i = 0; i < n; ++i) next(i) = rng.normal();

  EigenResult out;
  double theta = 0.0;
  Vector y;
  const Index check_stride = std::max<Index>(1, m_max / 25);
  Index checked = -1;

  auto ritz = [&](Eigen::SelfAdjointEigenSolver<Matrix>& es) {
    es.compute(T.topLeftCorner(m, m));
    checked = m;
    theta = es.eigenvalues()(0);
    y = es.eigenvectors().col(0);
    out.norm_estimate = std::max(out.norm_estimate, es.eigenvalues().cwiseAbs().maxCoeff());
    out.residual = (W.leftCols(m) * y - theta * (V.leftCols(m) * y)).norm();
    return out.residual <= opts.rel_tol * std::max(out.norm_estimate, 1e-300);
  };

  Eigen::SelfAdjointEigenSolver<Matrix> es;
  for (int cycle = 0; cycle <= opts.max_restarts; ++cycle) {
    const Index start = m;
    while (m < m_max) {
      const double nrm = orthogonalize(next, V, m);
      if (!(nrm > 1e-10 * std::max(1.0, out.norm_estimate))) {
        // Krylov space became invariant; continue from a fresh random direction.
        for (Index i = 0; i < n; ++i) next(i) = rng.normal();
        const double fresh = orthogonalize(next, V, m);
        if (fresh <= 1e-12) break;
        next /= fresh;
      } else {
        next /= nrm;
      }
      V.col(m) = next;
      W.col(m) = op(next);
      ++out.products;
      const Vector col = V.leftCols(m + 1).transpose() * W.col(m);
      T.col(m).head(m + 1) = col;
      T.row(m).head(m + 1) = col.transpose();
      next = W.col(m);
      ++m;
      if ((m - start) % check_stride == 0 || m == m_max || m == n) {
        if (ritz(es)) {
          out.converged = true;
          break;
        }
      }
    }
    if (m > start && !out.converged && checked != m) out.converged = ritz(es);
    if (out.converged || m == start || cycle == opts.max_restarts || m == n) break;

    // Thick restart: keep the `keep` smallest Ritz vectors and continue from
    // the residual direction they share.
    es.compute(T.topLeftCorner(m, m));
    const Matrix Y = es.eigenvectors().leftCols(keep);
    next = W.leftCols(m) * Y.col(0) - es.eigenvalues()(0) * (V.leftCols(m) * Y.col(0));
    const Matrix Vk = V.leftCols(m) * Y;
    const Matrix Wk = W.leftCols(m) * Y;
    V.leftCols(keep) = Vk;
    W.leftCols(keep) = Wk;
    T.setZero();
    T.topLeftCorner(keep, keep) = es.eigenvalues().head(keep).asDiagonal();
    m = keep;
    checked = keep;
    theta = es.eigenvalues()(0);
    y = Vector::Unit(keep, 0);
    ++out.restarts;
  }

  out.value = theta;
  out.vector = V.leftCols(m) * y;
  const double vn = out.vector.norm();
  if (vn > 0.0) out.vector /= vn;
  out.residual = (op(out.vector) - theta * out.vector).norm();
  ++out.products;
  if (!out.converged) {
    out.converged = out.residual <= opts.rel_tol * std::max(out.norm_estimate, 1e-300);
  }
  return out;
}

EigenResult hessian_min_eigenpair(const Objective& f, const Matrix& U, const EigenOptions& opts) {
  const Index d = U.rows();
  const Index k = U.cols();
  LinearOperator op = [&](const Vector& v) { return as_vector(f.hvp(U, as_factor(v, d, k))); };
  return min_eigenpair(op, d * k, opts);
}

Matrix dense_hessian(const Objective& f, const Matrix& U) {
  const Index d = U.rows();
  const Index k = U.cols();
  const Index n = d * k;
  Matrix H(n, n);
  Matrix E = Matrix::Zero(d, k);
  for (Index j = 0; j < n; ++j) {
    E.data()[j] = 1.0;
    H.col(j) = as_vector(f.hvp(U, E));
    E.data()[j] = 0.0;
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace colprune
