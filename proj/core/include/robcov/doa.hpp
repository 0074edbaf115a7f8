#pragma once

#include <span>
#include <string>
#include <vector>

#include "robcov/estimator.hpp"
#include "robcov/types.hpp"
#include "robcov/weights.hpp"

namespace robcov {

/// K narrowband sources impinging on a half-wavelength uniform linear array of N sensors.
struct ArrayScenario {
  Index N = 0;
  std::vector<double> theta;   ///< radians, one per source
  std::vector<double> powers;  ///< p_k > 0
  double sigma2 = 1.0;         ///< noise variance

  Index K() const noexcept { return static_cast<Index>(theta.size()); }
  /// K < N, distinct angles, positive powers, sigma2 > 0.
  void validate() const;
};

/// s(theta)_m = exp(i pi m sin(theta)) / sqrt(N), m = 0..N-1.
Vector steering_vector(double theta, Index N);

/// S(Theta) = [s(theta_1), ..., s(theta_K)].
Matrix steering_matrix(std::span<const double> theta, Index N);

/// C_N = S(Theta) P S(Theta)^* + sigma^2 I_N.
Matrix population_covariance(const ArrayScenario& scn);

enum class SpectrumKind { TrueMusic, EmpiricalMusic, GMusic, RobustGMusic };

std::string to_string(SpectrumKind kind);

struct PseudoSpectrum {
  std::vector<double> grid;  ///< radians, ascending
  std::vector<double> values;
  SpectrumKind kind = SpectrumKind::GMusic;
};

/// Angles lo_deg, lo_deg + step_deg, ..., hi_deg (inclusive when on the lattice), in radians.
std::vector<double> angle_grid_deg(double lo_deg, double hi_deg, double step_deg);

/// gamma(theta) = s^* E_W E_W^* s with E_W the sigma^2-eigenvectors of the exact C_N.
PseudoSpectrum true_music_spectrum(const ArrayScenario& scn, std::span<const double> grid);

struct GMusicWeights {
  RealVector beta;
  RealVector mu_hat;  ///< ascending
};

/// Weights beta_i and eigenvalues mu_hat of diag(lambda) - (1/n) sqrt(lambda) sqrt(lambda)^T.
/// lambda_hat must be strictly positive and ascending; 0 < K < N; n > N.
GMusicWeights gmusic_weights(const RealVector& lambda_hat, Index n, Index K);

/// Classical MUSIC: projector onto the bottom N-K eigenvectors of M.
PseudoSpectrum empirical_music_spectrum(const Matrix& M, Index K, std::span<const double> grid);

/// G-MUSIC on any positive multiple of S_N or C_N.
PseudoSpectrum gmusic_spectrum(const Matrix& M, Index n, Index K, std::span<const double> grid);

/// G-MUSIC with the robust M-estimate substituted for the sample covariance.
PseudoSpectrum robust_gmusic_spectrum(const SampleSet& S, const WeightFunction& w, Index K,
                                      std::span<const double> grid,
                                      const SolverOptions& opts = {});

/// Deepest K local minima of the spectrum, refined by parabolic interpolation, ascending.
std::vector<double> estimate_angles(const PseudoSpectrum& ps, Index K);

}  // namespace robcov
