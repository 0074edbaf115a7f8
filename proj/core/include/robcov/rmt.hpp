#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "robcov/datagen.hpp"
#include "robcov/sample_set.hpp"
#include "robcov/types.hpp"

namespace robcov {

/// Hermitian eigenvalues, ascending.
RealVector hermitian_eigenvalues(const Matrix& A);

/// Largest absolute eigenvalue of A - B.
double spectral_norm_gap(const Matrix& A, const Matrix& B);

struct SpacingResult {
  double max = 0.0;
  std::vector<double> per_index;
};

/// |scale lambda_i(C_hat) - lambda_i(S_hat)| over ascending spectra.
SpacingResult eigenvalue_spacing(const Matrix& C_hat, const Matrix& S_hat, double scale);

/// Spectral comparison of phi^{-1}(1) C_hat against S_hat.
struct SpectrumReport {
  RealVector eigenvalues_C_hat;
  RealVector eigenvalues_S_hat;
  double norm_gap = 0.0;
  double spacing_max = 0.0;
  double concentration_max = 0.0;
};

SpectrumReport compare_spectra(const SampleSet& S, const Matrix& C_hat, double scale);

struct EnOptions {
  double tol = 1e-13;
  int max_iter = 100000;
  /// x <- (1 - damping) x + damping * rhs(x).
  double damping = 0.5;
};

/// Solution of e = mean_t [ t / ((1 + c e)^{-1} t - z) ] over the population spectrum.
struct DeterministicEquivalent {
  double z = 0.0;
  double c = 0.0;
  std::vector<double> spectrum;
  double e = 0.0;
  int iterations = 0;
  /// |rhs(e) - e| / e at return.
  double residual = 0.0;
};

/// Right-hand side of the fixed-point equation.
double en_rhs(double e, double z, double c, std::span<const double> spectrum);

/// Damped fixed-point iteration from e = 1. z < 0 and 0 < c < 1 (DomainError otherwise).
DeterministicEquivalent solve_eN(double z, double c, std::span<const double> spectrum,
                                 const EnOptions& opts = {});

/// (1/N) tr C (S_N - z I)^{-1}, the random quantity e_N(z) approximates.
double empirical_resolvent_trace(const Matrix& S_hat, const Matrix& C, double z);

struct ConcentrationResult {
  double max_deviation = 0.0;
  RealVector deviations;
};

/// |(1/N) x_i^* S_N^{-1} x_i - 1| for every sample. SingularityError if S_N is singular.
ConcentrationResult quadratic_concentration(const SampleSet& S);

struct InterlacingCheck {
  RealVector full;          ///< eigenvalues of (1/n) X X^*
  RealVector leave_one_out; ///< eigenvalues of (1/n) X_(i) X_(i)^*
  bool holds = false;
};

/// lambda_k(S_(i)) <= lambda_k(S) <= lambda_{k+1}(S_(i)) for all k, with slack
/// 1e-10 * max(1, lambda_max). `i` is zero-based.
InterlacingCheck leave_one_out_interlacing(const SampleSet& S, Index i);

/// |x^*(A + t x x^*)^{-1} x - x^*A^{-1}x / (1 + t x^*A^{-1}x)|.
double mil_check(const Matrix& A, const Vector& x, double t);

struct RankOneGap {
  double gap = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// |tr B (A + v v^* + x I)^{-1} - tr B (A + x I)^{-1}| against ||B|| / x.
RankOneGap rank_one_perturbation_gap(const Matrix& B, const Matrix& A, const Vector& v, double x);

struct TraceProbe {
  Complex mean;
  /// Empirical E|delta - mean|^2 with delta = y^* A y - tr A.
  double variance = 0.0;
  int trials = 0;
};

/// Samples y with i.i.d. entries from `dist` and reports moments of y^* A y - tr A.
TraceProbe trace_concentration_probe(const Matrix& A, const EntryDistribution& dist, int trials,
                                     std::uint64_t seed);

/// (scale (1 - sqrt c)^2, scale (1 + sqrt c)^2).
std::pair<double, double> mp_edges(double c, double scale = 1.0);

}  // namespace robcov
