#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "colprune/rng.hpp"
#include "colprune/types.hpp"

namespace colprune {

enum class SensingKind { dense_gaussian, rank_one };

const char* to_string(SensingKind kind);

/// n symmetric measurement matrices A_i with observations y_i.
///
/// Dense sets keep the upper triangle of each A_i as a packed row of length
/// d(d+1)/2 (column by column), so <A_i, S> = packed_row_i . pack_pairing(S)
/// for every symmetric S. Rank-one sets keep
/// only the generating vectors x_i (A_i = x_i x_i^T) and never allocate a
/// d x d matrix.
class SensingSet {
 public:
  SensingSet() = default;

  /// Dense set from explicit matrices; each is symmetrized as (A + A^T)/2.
  static SensingSet from_matrices(const std::vector<Matrix>& matrices);
  /// Rank-one set; row i of `vectors` is x_i.
  static SensingSet from_vectors(Matrix vectors);

  SensingKind kind() const { return kind_; }
  Index size() const { return n_; }
  Index dim() const { return d_; }
  Index packed_dim() const { return d_ * (d_ + 1) / 2; }

  const Matrix& packed() const { return packed_; }
  const Matrix& vectors() const { return vectors_; }

  /// A_i as an explicit d x d matrix (tests and CSV export only).
  Matrix matrix(Index i) const;

  /// <A_i, U U^T> for every i.
  Vector measure_gram(const Matrix& U) const;
  /// <A_i, S> for symmetric S (only the upper triangle of S is read for dense sets).
  Vector measure_symmetric(const Matrix& S) const;
  /// <A_i, U Z^T + Z U^T> for every i.
  Vector measure_cross(const Matrix& U, const Matrix& Z) const;
  /// (sum_i w_i A_i) V.
  Matrix adjoint_times(const Vector& w, const Matrix& V) const;
  /// sum_i w_i A_i as a dense symmetric matrix (dense kind only).
  Matrix adjoint(const Vector& w) const;

  bool measured() const { return measured_; }
  const Vector& observations() const { return y_; }
  double noise_sigma() const { return noise_sigma_; }
  std::uint64_t seed() const { return seed_; }

  void set_observations(Vector y, double noise_sigma);
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  bool operator==(const SensingSet& other) const;

 private:
  SensingKind kind_ = SensingKind::dense_gaussian;
  Index n_ = 0;
  Index d_ = 0;
  Matrix packed_;   // n x d(d+1)/2, dense kind
  Matrix vectors_;  // n x d, rank-one kind
  Vector y_;
  double noise_sigma_ = 0.0;
  std::uint64_t seed_ = 0;
  bool measured_ = false;
};

/// Upper triangle of S, column by column.
Vector pack_upper(const Matrix& S);
/// Upper triangle of S with off-diagonal entries doubled, so that
/// pack_upper(A) . pack_pairing(S) = <A, S> for symmetric A and S.
Vector pack_pairing(const Matrix& S);
/// Symmetric matrix from its packed upper triangle (inverse of pack_upper).
Matrix unpack_upper(const Vector& packed, Index d);
/// pack_pairing(U V^T + V U^T).
Vector pack_symmetrized_product(const Matrix& U, const Matrix& V);

/// U* = Q diag(s) P^T with Haar Q (d x r), P (r x r) and s interpolating
/// linearly from 1 down to sigma_r_star.
GroundTruth gen_ground_truth(Index d, Index r, double sigma_r_star, Rng& rng);

/// Entry variance of Gaussian measurement draws. `unit` gives
/// E<A, X>^2 = ||X||_F^2 for symmetric X, which is the normalization the RIP
/// condition is written in; `inverse_dim` draws N(0, 1/d) entries, for which
/// the same expectation is ||X||_F^2 / d.
enum class GaussianScale { unit, inverse_dim };

/// n matrices with i.i.d. Gaussian entries, symmetrized as (A + A^T)/2.
SensingSet gen_gaussian_sensing(Index n, Index d, Rng& rng,
                                GaussianScale scale = GaussianScale::unit);

/// n vectors x_i ~ N(0, I_d); A_i = x_i x_i^T.
SensingSet gen_rank_one_sensing(Index n, Index d, Rng& rng);

/// Copy of `sensing` with y_i = <A_i, U* U*^T> + N(0, sigma^2).
SensingSet measure(const GroundTruth& star, const SensingSet& sensing, double sigma, Rng& rng);

struct RipEstimate {
  /// Lower bound on the RIP constant: the largest deviation seen over the probes.
  double delta_hat = 0.0;
  Matrix witness;  // unit-Frobenius probe attaining delta_hat
  Index trials = 0;
  Index rank_bound = 0;
};

/// |(1/n) sum_i <A_i, X>^2 - ||X||_F^2| / ||X||_F^2 for a single probe.
double rip_statistic(const SensingSet& sensing, const Matrix& X);

/// Monte-Carlo lower bound on delta over `trials` symmetric probes
/// X = F S F^T / ||F S F^T||_F with Gaussian F (d x rank_bound) and a random
/// sign diagonal S. Probes are drawn sequentially, so a longer run extends a
/// shorter one with the same seed.
RipEstimate rip_estimate(const SensingSet& sensing, Index rank_bound, Index trials, Rng& rng);

/// c_delta (sigma_r*)^{3/2} / (sqrt(k) r^{5/2}): the RIP level the finite-sample
/// guarantee asks for, printed next to estimates for context.
double rip_requirement(double sigma_r_star, Index k, Index r, double c_delta = 1.0);

// Binary container: "CPSENSE1", u32 version, u32 kind, u64 n, u64 d, f64 sigma,
// u64 seed, u32 measured, then little-endian f64 payload (per-measurement upper
// triangle row-major for dense sets or x_i for rank-one sets) followed by y.
void write_sensing_binary(const SensingSet& sensing, std::ostream& out);
SensingSet read_sensing_binary(std::istream& in);
void write_sensing_binary(const SensingSet& sensing, const std::string& path);
SensingSet read_sensing_binary(const std::string& path);

/// One row per measurement: i, y, then upper-triangle entries a_j_k (dense) or x_j (rank-one).
void write_sensing_csv(const SensingSet& sensing, std::ostream& out);

}  // namespace colprune
