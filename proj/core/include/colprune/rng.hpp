#pragma once

#include <cstdint>
#include <random>

#include "colprune/types.hpp"

namespace colprune {

/// Seeded 64-bit Mersenne Twister with a draw counter.
///
/// Substreams for parallel trials come from split(stream): the child seed is
/// splitmix64(seed + golden * (stream + 1)), so distinct stream ids give
/// unrelated engine states and the parent is left untouched.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  Rng split(std::uint64_t stream) const;

  double normal();
  double uniform();  // [0, 1)
  std::uint64_t next_u64();

  /// rows x cols matrix of i.i.d. N(0, scale^2) entries, filled column-major.
  Matrix gaussian(Index rows, Index cols, double scale = 1.0);

  /// Haar-distributed matrix with orthonormal columns (rows >= cols).
  Matrix haar_orthonormal(Index rows, Index cols);

  /// Uniform sample from the Frobenius ball of the given radius.
  Matrix uniform_frobenius_ball(Index rows, Index cols, double radius);

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace colprune
