#include "colprune/rng.hpp"

#include <cmath>

#include "colprune/errors.hpp"

namespace colprune {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1)));
}

double Rng::normal() {
  ++draws_;
  return normal_(engine_);
}

double Rng::uniform() {
  ++draws_;
  return uniform_(engine_);
}

std::uint64_t Rng::next_u64() {
  ++draws_;
  return engine_();
}

Matrix Rng::gaussian(Index rows, Index cols, double scale) {
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) M(i, j) = scale * normal();
  }
  return M;
}

Matrix Rng::haar_orthonormal(Index rows, Index cols) {
  if (cols > rows) throw DimensionError("haar_orthonormal: cols must not exceed rows");
  const Matrix G = gaussian(rows, cols);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(rows, cols);
  // Sign fix makes the distribution exactly Haar.
  for (Index j = 0; j < cols; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

Matrix Rng::uniform_frobenius_ball(Index rows, Index cols, double radius) {
  Matrix dir = gaussian(rows, cols);
  const double n = dir.norm();
  if (n == 0.0) return Matrix::Zero(rows, cols);
  const double dim = static_cast<double>(rows * cols);
  const double scale = radius * std::pow(uniform(), 1.0 / dim);
  return dir * (scale / n);
}

}  // namespace colprune
