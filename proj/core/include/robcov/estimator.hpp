#pragma once

#include <vector>

#include "robcov/sample_set.hpp"
#include "robcov/types.hpp"
#include "robcov/weights.hpp"

namespace robcov {

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 500;
  /// Starting point Z^(0) = initial_scale * I_N.
  double initial_scale = 1.0;
};

/// Converged solution of Z = (1/n) sum_i u((1/N) x_i^* Z^{-1} x_i) x_i x_i^*.
struct CovarianceEstimate {
  Matrix matrix;
  /// d_i = (1/N) x_i^* C^{-1} x_i for the returned matrix.
  RealVector d;
  int iterations = 0;
  /// max_i |d_i^(t+1) - d_i^(t)| / max(1, d_i^(t)) at the last step.
  double residual = 0.0;
  /// phi^{-1}(1) for the weight function that produced the estimate.
  double scale_reference = 1.0;
};

/// (1/n) X X^*.
Matrix sample_covariance(const SampleSet& S);

/// d_i = (1/N) x_i^* Z^{-1} x_i from a single Cholesky factorization of Z.
RealVector quadratic_forms(const SampleSet& S, const Matrix& Z);

/// (1/n) sum_i weights_i x_i x_i^*, Hermitian by construction.
Matrix weighted_scatter(const SampleSet& S, const RealVector& weights);

/// Throws SpanError unless lambda_min(S_N) > 1e-12 lambda_max(S_N).
void require_spanning(const SampleSet& S);

/// Fixed-point iteration Z^(t+1) = (1/n) sum_i u(d_i(Z^(t))) x_i x_i^* from Z^(0) = I_N
/// (scaled by opts.initial_scale). Stops on the relative change of the d_i.
///
/// Requires N < n and spanning columns (SpanError). A custom WeightFunction must
/// validate on default_validation_grid() (DomainError otherwise). Throws
/// NonConvergenceError when opts.max_iter is exhausted.
CovarianceEstimate robust_fixed_point(const SampleSet& S, const WeightFunction& w,
                                      const SolverOptions& opts = {});

/// ||C - (1/n) sum_i u(d_i) x_i x_i^*|| (spectral norm), d recomputed from C.
double fixed_point_residual(const SampleSet& S, const WeightFunction& w, const Matrix& C);

struct InterferenceResult {
  RealVector q;
  int iterations = 0;
  double residual = 0.0;
  /// q_j >= h_j(q0) for all j.
  bool feasible_start = false;
  /// max_j q_j^(t), t = 0..iterations.
  std::vector<double> max_trace;
  /// Every step satisfied q^(t+1) <= q^(t) entrywise (relative slack 1e-12).
  bool entrywise_nonincreasing = true;
};

/// Iterates q^(t+1) = h(q^(t)) with
///   h_j(q) = (1/N) x_j^* ((1/n) sum_i u(q_i) x_i x_i^*)^{-1} x_j.
InterferenceResult interference_iterate(const SampleSet& S, const WeightFunction& w,
                                        const RealVector& q0, const SolverOptions& opts = {});

/// phi^{-1}(1) C, the matrix asymptotically equivalent to S_N.
Matrix scaled_estimate(const CovarianceEstimate& e, const WeightFunction& w);

}  // namespace robcov
