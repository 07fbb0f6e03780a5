#include "colprune/sensing.hpp"

#include <cmath>

#include "colprune/errors.hpp"
#include "colprune/linalg.hpp"

namespace colprune {

const char* to_string(SensingKind kind) {
  switch (kind) {
    case SensingKind::dense_gaussian: return "dense_gaussian";
    case SensingKind::rank_one: return "rank_one";
  }
  return "unknown";
}

Vector pack_upper(const Matrix& S) {
  const Index d = S.rows();
  Vector out(d * (d + 1) / 2);
  Index idx = 0;
  for (Index c = 0; c < d; ++c) {
    for (Index r = 0; r <= c; ++r) out(idx++) = S(r, c);
  }
  return out;
}

Vector pack_pairing(const Matrix& S) {
  const Index d = S.rows();
  Vector out(d * (d + 1) / 2);
  Index idx = 0;
  for (Index c = 0; c < d; ++c) {
    for (Index r = 0; r < c; ++r) out(idx++) = 2.0 * S(r, c);
    out(idx++) = S(c, c);
  }
  return out;
}

Matrix unpack_upper(const Vector& packed, Index d) {
  if (packed.size() != d * (d + 1) / 2) throw DimensionError("unpack_upper: length mismatch");
  Matrix S(d, d);
  Index idx = 0;
  for (Index c = 0; c < d; ++c) {
    for (Index r = 0; r <= c; ++r) {
      S(r, c) = packed(idx);
      S(c, r) = packed(idx);
      ++idx;
    }
  }
  return S;
}

Vector pack_symmetrized_product(const Matrix& U, const Matrix& V) {
  const Matrix M = U * V.transpose();
  const Index d = M.rows();
  Vector out(d * (d + 1) / 2);
  Index idx = 0;
  for (Index c = 0; c < d; ++c) {
    for (Index r = 0; r < c; ++r) out(idx++) = 2.0 * (M(r, c) + M(c, r));
    out(idx++) = 2.0 * M(c, c);
  }
  return out;
}

SensingSet SensingSet::from_matrices(const std::vector<Matrix>& matrices) {
  if (matrices.empty()) throw InvalidArgument("sensing set needs at least one matrix");
  const Index d = matrices.front().rows();
  SensingSet s;
  s.kind_ = SensingKind::dense_gaussian;
  s.n_ = static_cast<Index>(matrices.size());
  s.d_ = d;
  s.packed_.resize(s.n_, d * (d + 1) / 2);
  for (Index i = 0; i < s.n_; ++i) {
    const Matrix& A = matrices[static_cast<std::size_t>(i)];
    if (A.rows() != d || A.cols() != d) throw DimensionError("sensing matrices must all be d x d");
    const Matrix sym = 0.5 * (A + A.transpose());
    s.packed_.row(i) = pack_upper(sym).transpose();
  }
  return s;
}

SensingSet SensingSet::from_vectors(Matrix vectors) {
  if (vectors.rows() < 1 || vectors.cols() < 1) {
    throw InvalidArgument("rank-one sensing set needs at least one vector");
  }
  SensingSet s;
  s.kind_ = SensingKind::rank_one;
  s.n_ = vectors.rows();
  s.d_ = vectors.cols();
  s.vectors_ = std::move(vectors);
  return s;
}

Matrix SensingSet::matrix(Index i) const {
  if (i < 0 || i >= n_) throw InvalidArgument("measurement index out of range");
  if (kind_ == SensingKind::rank_one) {
    const Vector x = vectors_.row(i).transpose();
    return x * x.transpose();
  }
  return unpack_upper(packed_.row(i).transpose(), d_);
}

Vector SensingSet::measure_gram(const Matrix& U) const {
  if (U.rows() != d_) throw DimensionError("measure_gram: U has wrong row count");
  if (kind_ == SensingKind::rank_one) {
    const Matrix XU = vectors_ * U;
    return XU.rowwise().squaredNorm();
  }
  return packed_ * pack_symmetrized_product(U, U) * 0.5;
}

Vector SensingSet::measure_symmetric(const Matrix& S) const {
  if (S.rows() != d_ || S.cols() != d_) throw DimensionError("measure_symmetric: shape mismatch");
  if (kind_ == SensingKind::rank_one) {
    const Matrix XS = vectors_ * S.selfadjointView<Eigen::Upper>();
    return (XS.array() * vectors_.array()).rowwise().sum();
  }
  return packed_ * pack_pairing(S);
}

Vector SensingSet::measure_cross(const Matrix& U, const Matrix& Z) const {
  if (U.rows() != d_ || Z.rows() != d_ || U.cols() != Z.cols()) {
    throw DimensionError("measure_cross: shape mismatch");
  }
  if (kind_ == SensingKind::rank_one) {
    const Matrix XU = vectors_ * U;
    const Matrix XZ = vectors_ * Z;
    return 2.0 * (XU.array() * XZ.array()).rowwise().sum();
  }
  return packed_ * pack_symmetrized_product(U, Z);
}

Matrix SensingSet::adjoint(const Vector& w) const {
  if (w.size() != n_) throw DimensionError("adjoint: weight length mismatch");
  if (kind_ == SensingKind::rank_one) {
    throw InvalidArgument("adjoint: rank-one sets never form d x d matrices; use adjoint_times");
  }
  return unpack_upper(packed_.transpose() * w, d_);
}

Matrix SensingSet::adjoint_times(const Vector& w, const Matrix& V) const {
  if (w.size() != n_) throw DimensionError("adjoint_times: weight length mismatch");
  if (V.rows() != d_) throw DimensionError("adjoint_times: V has wrong row count");
  if (kind_ == SensingKind::rank_one) {
    const Matrix XV = vectors_ * V;
    return vectors_.transpose() * (w.asDiagonal() * XV);
  }
  return adjoint(w) * V;
}

void SensingSet::set_observations(Vector y, double noise_sigma) {
  if (y.size() != n_) throw DimensionError("observation count must equal the number of measurements");
  if (noise_sigma < 0.0) throw InvalidArgument("noise sigma must be nonnegative");
  y_ = std::move(y);
  noise_sigma_ = noise_sigma;
  measured_ = true;
}

bool SensingSet::operator==(const SensingSet& other) const {
  return kind_ == other.kind_ && n_ == other.n_ && d_ == other.d_ && packed_ == other.packed_ &&
         vectors_ == other.vectors_ && y_ == other.y_ && noise_sigma_ == other.noise_sigma_ &&
         seed_ == other.seed_ && measured_ == other.measured_;
}

GroundTruth gen_ground_truth(Index d, Index r, double sigma_r_star, Rng& rng) {
  if (r < 1 || r > d) throw InvalidArgument("gen_ground_truth: need 1 <= r <= d");
  if (!(sigma_r_star > 0.0 && sigma_r_star <= 1.0)) {
    throw InvalidArgument("gen_ground_truth: sigma_r_star must lie in (0, 1]");
  }
  if (r == 1 && sigma_r_star != 1.0) {
    throw InvalidArgument("gen_ground_truth: a rank-1 truth with unit spectral norm has sigma_r_star = 1");
  }
  Vector s(r);
  for (Index j = 0; j < r; ++j) {
    s(j) = r == 1 ? 1.0 : 1.0 - (1.0 - sigma_r_star) * static_cast<double>(j) / static_cast<double>(r - 1);
  }
  const Matrix Q = rng.haar_orthonormal(d, r);
  const Matrix P = rng.haar_orthonormal(r, r);
  Matrix factor = Q * s.asDiagonal() * P.transpose();
  return GroundTruth{std::move(factor), std::move(s)};
}

SensingSet gen_gaussian_sensing(Index n, Index d, Rng& rng, GaussianScale scale) {
  if (n < 1 || d < 1) throw InvalidArgument("gen_gaussian_sensing: need n >= 1 and d >= 1");
  const double sd = scale == GaussianScale::unit ? 1.0 : 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<Matrix> mats;
  mats.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) mats.push_back(rng.gaussian(d, d, sd));
  SensingSet s = SensingSet::from_matrices(mats);
  s.set_seed(rng.seed());
  return s;
}

SensingSet gen_rank_one_sensing(Index n, Index d, Rng& rng) {
  if (n < 1 || d < 1) throw InvalidArgument("gen_rank_one_sensing: need n >= 1 and d >= 1");
  Matrix X(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) X(i, j) = rng.normal();
  }
  SensingSet s = SensingSet::from_vectors(std::move(X));
  s.set_seed(rng.seed());
  return s;
}

SensingSet measure(const GroundTruth& star, const SensingSet& sensing, double sigma, Rng& rng) {
  if (star.rows() != sensing.dim()) throw DimensionError("measure: ground truth and sensing dimensions differ");
  if (sigma < 0.0) throw InvalidArgument("measure: sigma must be nonnegative");
  Vector y = sensing.measure_gram(star.factor);
  if (sigma > 0.0) {
    for (Index i = 0; i < y.size(); ++i) y(i) += sigma * rng.normal();
  }
  SensingSet out = sensing;
  out.set_observations(std::move(y), sigma);
  return out;
}

double rip_statistic(const SensingSet& sensing, const Matrix& X) {
  if (sensing.kind() != SensingKind::dense_gaussian) {
    throw InvalidArgument("rip_statistic: only dense Gaussian sets satisfy RIP");
  }
  const Matrix sym = 0.5 * (X + X.transpose());
  const double fro2 = sym.squaredNorm();
  if (fro2 == 0.0) throw InvalidArgument("rip_statistic: probe has zero symmetric part");
  const Vector m = sensing.measure_symmetric(sym);
  const double energy = m.squaredNorm() / static_cast<double>(sensing.size());
  return std::abs(energy - fro2) / fro2;
}

RipEstimate rip_estimate(const SensingSet& sensing, Index rank_bound, Index trials, Rng& rng) {
  if (trials < 1) throw InvalidArgument("rip_estimate: trials must be positive");
  if (rank_bound < 1) throw InvalidArgument("rip_estimate: rank bound must be positive");
  if (sensing.kind() != SensingKind::dense_gaussian) {
    throw InvalidArgument("rip_estimate: only dense Gaussian sets satisfy RIP");
  }
  RipEstimate est;
  est.trials = trials;
  est.rank_bound = rank_bound;
  est.delta_hat = -1.0;
  const Index d = sensing.dim();
  for (Index t = 0; t < trials; ++t) {
    const Matrix F = rng.gaussian(d, rank_bound);
    Vector signs(rank_bound);
    for (Index j = 0; j < rank_bound; ++j) signs(j) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Matrix X = F * signs.asDiagonal() * F.transpose();
    const double n = X.norm();
    if (n == 0.0) continue;
    X /= n;
    const double stat = rip_statistic(sensing, X);
    if (stat > est.delta_hat) {
      est.delta_hat = stat;
      est.witness = std::move(X);
    }
  }
  est.delta_hat = std::max(est.delta_hat, 0.0);
  return est;
}

double rip_requirement(double sigma_r_star, Index k, Index r, double c_delta) {
  return c_delta * std::pow(sigma_r_star, 1.5) /
         (std::sqrt(static_cast<double>(k)) * std::pow(static_cast<double>(r), 2.5));
}

}  // namespace colprune
