#include "robcov/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "robcov/errors.hpp"

namespace robcov {

namespace {

void require_nonempty(const SampleSet& S) {
  if (S.N() < 1 || S.n() < 1) throw DimensionError("empty sample set");
}

RealVector apply_u(const WeightFunction& w, const RealVector& d) {
  RealVector u(d.size());
  for (Index i = 0; i < d.size(); ++i) u(i) = w.u(d(i));
  return u;
}

double max_relative_change(const RealVector& next, const RealVector& prev) {
  double r = 0.0;
  for (Index i = 0; i < next.size(); ++i) {
    r = std::max(r, std::abs(next(i) - prev(i)) / std::max(1.0, prev(i)));
  }
  return r;
}

void check_solver_preconditions(const SampleSet& S, const WeightFunction& w,
                                const SolverOptions& opts) {
  require_nonempty(S);
  if (S.N() >= S.n()) {
    std::ostringstream os;
    os << "robust estimation needs N < n, got N=" << S.N() << ", n=" << S.n();
    throw SpanError(os.str());
  }
  if (!(opts.tol > 0.0) || opts.max_iter < 1 || !(opts.initial_scale > 0.0)) {
    throw DomainError("solver options: tol > 0, max_iter >= 1 and initial_scale > 0 required");
  }
  if (w.family() == WeightFamily::Custom) {
    const auto grid = default_validation_grid();
    const auto report = validate(w, grid);
    if (!report.valid) {
      throw DomainError("custom weight '" + w.name() +
                        "' violates: " + report.first_violation->condition);
    }
  }
  require_spanning(S);
}

}  // namespace

Matrix sample_covariance(const SampleSet& S) {
  require_nonempty(S);
  return weighted_scatter(S, RealVector::Ones(S.n()));
}

Matrix weighted_scatter(const SampleSet& S, const RealVector& weights) {
  const Index N = S.N();
  const Index n = S.n();
  if (weights.size() != n) throw DimensionError("weighted_scatter: one weight per sample required");

  Matrix Xw = S.X;
  for (Index i = 0; i < n; ++i) Xw.col(i) *= std::sqrt(weights(i));

  Matrix Z = Matrix::Zero(N, N);
  Z.selfadjointView<Eigen::Lower>().rankUpdate(Xw, 1.0 / static_cast<double>(n));
  // Mirror the lower triangle; force a real diagonal.
  Matrix full = Z.selfadjointView<Eigen::Lower>();
  full.diagonal() = full.diagonal().real().cast<Complex>();
  return full;
}

RealVector quadratic_forms(const SampleSet& S, const Matrix& Z) {
  require_nonempty(S);
  if (Z.rows() != S.N() || Z.cols() != S.N()) {
    throw DimensionError("quadratic_forms: Z must be N x N");
  }
  Eigen::LLT<Matrix> llt(Z);
  if (llt.info() != Eigen::Success) {
    throw SingularityError("quadratic_forms: Z is not positive definite");
  }
  const Matrix W = llt.matrixL().solve(S.X);
  RealVector d = W.colwise().squaredNorm().transpose() / static_cast<double>(S.N());
  if (!d.allFinite()) throw SingularityError("quadratic_forms: non-finite result");
  return d;
}

void require_spanning(const SampleSet& S) {
  require_nonempty(S);
  const Matrix Sn = sample_covariance(S);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Sn, Eigen::EigenvaluesOnly);
  const RealVector& lam = eig.eigenvalues();
  const double lo = lam(0);
  const double hi = lam(lam.size() - 1);
  if (!(hi > 0.0) || !(lo > 1e-12 * hi)) {
    std::ostringstream os;
    os << "sample columns do not span C^N (lambda_min=" << lo << ", lambda_max=" << hi << ")";
    throw SpanError(os.str());
  }
}

CovarianceEstimate robust_fixed_point(const SampleSet& S, const WeightFunction& w,
                                      const SolverOptions& opts) {
  check_solver_preconditions(S, w, opts);
  const Index N = S.N();

  // d for Z^(0) = a I is ||x_i||^2 / (a N).
  RealVector d =
      S.X.colwise().squaredNorm().transpose() / (opts.initial_scale * static_cast<double>(N));

  double residual = 0.0;
  for (int t = 1; t <= opts.max_iter; ++t) {
    Matrix Z = weighted_scatter(S, apply_u(w, d));
    RealVector next = quadratic_forms(S, Z);
    residual = max_relative_change(next, d);
    d = std::move(next);
    if (residual <= opts.tol) {
      CovarianceEstimate e;
      e.matrix = std::move(Z);
      e.d = std::move(d);
      e.iterations = t;
      e.residual = residual;
      e.scale_reference = w.phi_inverse(1.0);
      return e;
    }
  }
  std::ostringstream os;
  os << "robust_fixed_point: no convergence after " << opts.max_iter
     << " iterations (residual " << residual << ")";
  throw NonConvergenceError(os.str(), residual, opts.max_iter);
}

double fixed_point_residual(const SampleSet& S, const WeightFunction& w, const Matrix& C) {
  const RealVector d = quadratic_forms(S, C);
  const Matrix diff = C - weighted_scatter(S, apply_u(w, d));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

InterferenceResult interference_iterate(const SampleSet& S, const WeightFunction& w,
                                        const RealVector& q0, const SolverOptions& opts) {
  check_solver_preconditions(S, w, opts);
  if (q0.size() != S.n()) throw DimensionError("interference_iterate: q0 needs n entries");
  if (!(q0.array() > 0.0).all() || !q0.allFinite()) {
    throw DomainError("interference_iterate: q0 must be strictly positive and finite");
  }

  InterferenceResult r;
  RealVector q = q0;
  r.max_trace.push_back(q.maxCoeff());

  for (int t = 1; t <= opts.max_iter; ++t) {
    RealVector next = quadratic_forms(S, weighted_scatter(S, apply_u(w, q)));
    if (t == 1) r.feasible_start = (q.array() >= next.array()).all();
    for (Index j = 0; j < q.size(); ++j) {
      if (next(j) > q(j) * (1.0 + 1e-12)) r.entrywise_nonincreasing = false;
    }
    r.residual = max_relative_change(next, q);
    q = std::move(next);
    r.max_trace.push_back(q.maxCoeff());
    if (r.residual <= opts.tol) {
      r.q = std::move(q);
      r.iterations = t;
      return r;
    }
  }
  std::ostringstream os;
  os << "interference_iterate: no convergence after " << opts.max_iter
     << " iterations (residual " << r.residual << ")";
  throw NonConvergenceError(os.str(), r.residual, opts.max_iter);
}

Matrix scaled_estimate(const CovarianceEstimate& e, const WeightFunction& w) {
  return w.phi_inverse(1.0) * e.matrix;
}

}  // namespace robcov
