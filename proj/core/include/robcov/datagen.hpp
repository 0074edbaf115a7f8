#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "robcov/sample_set.hpp"
#include "robcov/types.hpp"

namespace robcov {

struct ArrayScenario;

// ---------------------------------------------------------------------------
// Random streams

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of stream `index` derived from `master`. Streams with distinct indices
/// are independent for practical purposes; the mapping is fixed so a trial's
/// data depends only on (master, index), never on scheduling.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept;

using RandomEngine = std::mt19937_64;

// ---------------------------------------------------------------------------
// Entry distributions

enum class EntryKind { GaussianComplex, GaussianReal, Qpsk, StudentTNormalized, StudentTComplex };

/// Zero-mean unit-variance law of the entries y_ij.
struct EntryDistribution {
  EntryKind kind = EntryKind::GaussianComplex;
  /// Degrees of freedom; Student-t kinds only.
  double dof = 0.0;

  static EntryDistribution gaussian_complex() { return {EntryKind::GaussianComplex, 0.0}; }
  static EntryDistribution gaussian_real() { return {EntryKind::GaussianReal, 0.0}; }
  static EntryDistribution qpsk() { return {EntryKind::Qpsk, 0.0}; }
  static EntryDistribution student_t(double dof) { return {EntryKind::StudentTNormalized, dof}; }
  static EntryDistribution student_t_complex(double dof) {
    return {EntryKind::StudentTComplex, dof};
  }

  bool is_complex() const noexcept;
  double variance() const noexcept { return 1.0; }
  /// E|y|^4.
  double fourth_moment() const;
  /// Throws MomentConditionError unless some (8 + eta)-th moment, eta > 0, is finite.
  void validate() const;

  std::string name() const;
};

/// Student-t moments of order < dof are finite, so dof must exceed 8.
inline constexpr double kStudentDofFloor = 8.0;

EntryDistribution entry_distribution_from_json(const nlohmann::json& j);
nlohmann::json entry_distribution_to_json(const EntryDistribution& d);

/// M x n matrix of i.i.d. entries; deterministic in `seed`.
Matrix generate_y(const EntryDistribution& dist, Index M, Index n, std::uint64_t seed);

/// Same as generate_y but drawing from a caller-owned engine.
Matrix generate_y(const EntryDistribution& dist, Index M, Index n, RandomEngine& rng);

// ---------------------------------------------------------------------------
// Population covariance models

enum class CovarianceKind { Identity, ScaledIdentity, Toeplitz, Spiked };

struct CovarianceModel {
  CovarianceKind kind = CovarianceKind::Identity;
  double scale = 1.0;
  /// Toeplitz correlation, C_jk = rho^|j-k|, 0 <= rho < 1.
  double rho = 0.0;
  /// Spiked: eigenvalues replacing the top of an identity spectrum.
  std::vector<double> spikes;

  static CovarianceModel identity() { return {}; }
  static CovarianceModel scaled_identity(double s) {
    return {CovarianceKind::ScaledIdentity, s, 0.0, {}};
  }
  static CovarianceModel toeplitz(double rho) { return {CovarianceKind::Toeplitz, 1.0, rho, {}}; }
  static CovarianceModel spiked(std::vector<double> spikes) {
    return {CovarianceKind::Spiked, 1.0, 0.0, std::move(spikes)};
  }

  /// Declared spectral bounds [C-, C+] holding for every N.
  std::pair<double, double> bounds() const;
  void validate() const;
  std::string name() const;
};

CovarianceModel covariance_model_from_json(const nlohmann::json& j);
nlohmann::json covariance_model_to_json(const CovarianceModel& m);

struct CovarianceFactor {
  Matrix A;  ///< N x M
  Matrix C;  ///< N x N, C = A A^*
};

/// A = [C^{1/2}, 0] with the Hermitian square root.
CovarianceFactor build_covariance(const CovarianceModel& model, Index N, Index M);

/// X = A_N Y with Y from generate_y.
SampleSet generate_samples(const CovarianceModel& model, const EntryDistribution& dist, Index N,
                           Index M, Index n, std::uint64_t seed);

struct Snapshots {
  SampleSet samples;
  Matrix A;  ///< N x (K + N), [S(Theta) P^{1/2}, sigma I_N]
};

/// x_i = sum_k sqrt(p_k) s(theta_k) z_{k,i} + sigma w_i.
/// Sources draw from stream_seed(seed, 0), noise from stream_seed(seed, 1).
Snapshots generate_snapshots(const ArrayScenario& scn, Index n, const EntryDistribution& source_dist,
                             const EntryDistribution& noise_dist, std::uint64_t seed);

}  // namespace robcov
