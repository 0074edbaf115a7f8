#include "robcov/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "robcov/errors.hpp"
#include "robcov/estimator.hpp"

namespace robcov {

namespace {

void require_same_square(const Matrix& A, const Matrix& B, const char* who) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows()) {
    throw DimensionError(std::string(who) + ": matrices must be square and of equal size");
  }
}

Matrix hermitian_part(const Matrix& A) { return 0.5 * (A + A.adjoint()); }

}  // namespace

RealVector hermitian_eigenvalues(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionError("hermitian_eigenvalues: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(A), Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

double spectral_norm_gap(const Matrix& A, const Matrix& B) {
  require_same_square(A, B, "spectral_norm_gap");
  if (A.rows() == 0) return 0.0;
  return hermitian_eigenvalues(A - B).cwiseAbs().maxCoeff();
}

SpacingResult eigenvalue_spacing(const Matrix& C_hat, const Matrix& S_hat, double scale) {
  require_same_square(C_hat, S_hat, "eigenvalue_spacing");
  const RealVector lc = hermitian_eigenvalues(C_hat);
  const RealVector ls = hermitian_eigenvalues(S_hat);
  SpacingResult r;
  r.per_index.resize(static_cast<std::size_t>(lc.size()));
  for (Index i = 0; i < lc.size(); ++i) {
    const double gap = std::abs(scale * lc(i) - ls(i));
    r.per_index[static_cast<std::size_t>(i)] = gap;
    r.max = std::max(r.max, gap);
  }
  return r;
}

SpectrumReport compare_spectra(const SampleSet& S, const Matrix& C_hat, double scale) {
  const Matrix S_hat = sample_covariance(S);
  SpectrumReport r;
  r.eigenvalues_C_hat = hermitian_eigenvalues(C_hat);
  r.eigenvalues_S_hat = hermitian_eigenvalues(S_hat);
  r.norm_gap = spectral_norm_gap(scale * C_hat, S_hat);
  r.spacing_max =
      (scale * r.eigenvalues_C_hat - r.eigenvalues_S_hat).cwiseAbs().maxCoeff();
  r.concentration_max = quadratic_concentration(S).max_deviation;
  return r;
}

// ---------------------------------------------------------------------------

double en_rhs(double e, double z, double c, std::span<const double> spectrum) {
  const double shrink = 1.0 / (1.0 + c * e);
  double acc = 0.0;
  for (double t : spectrum) acc += t / (shrink * t - z);
  return acc / static_cast<double>(spectrum.size());
}

DeterministicEquivalent solve_eN(double z, double c, std::span<const double> spectrum,
                                 const EnOptions& opts) {
  if (!(z < 0.0)) throw DomainError("solve_eN: z must be negative");
  if (!(c > 0.0 && c < 1.0)) throw DomainError("solve_eN: c must lie in (0, 1)");
  if (spectrum.empty()) throw DomainError("solve_eN: empty population spectrum");
  for (double t : spectrum)
    if (!(t >= 0.0)) throw DomainError("solve_eN: population spectrum must be nonnegative");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
    throw DomainError("solve_eN: damping must lie in (0, 1]");
  }

  DeterministicEquivalent out;
  out.z = z;
  out.c = c;
  out.spectrum.assign(spectrum.begin(), spectrum.end());

  double e = 1.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const double next = (1.0 - opts.damping) * e + opts.damping * en_rhs(e, z, c, spectrum);
    const double step = std::abs(next - e);
    e = next;
    if (step <= opts.tol * std::max(e, 1e-300)) {
      out.e = e;
      out.iterations = it;
      out.residual = std::abs(en_rhs(e, z, c, spectrum) - e) / e;
      return out;
    }
  }
  const double residual = std::abs(en_rhs(e, z, c, spectrum) - e) / e;
  throw NonConvergenceError("solve_eN: no convergence", residual, opts.max_iter);
}

double empirical_resolvent_trace(const Matrix& S_hat, const Matrix& C, double z) {
  require_same_square(S_hat, C, "empirical_resolvent_trace");
  const Index N = S_hat.rows();
  const Matrix Q = S_hat - z * Matrix::Identity(N, N);
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() != Eigen::Success) throw SingularityError("S_hat - zI is not positive definite");
  return (C * llt.solve(Matrix::Identity(N, N))).trace().real() / static_cast<double>(N);
}

ConcentrationResult quadratic_concentration(const SampleSet& S) {
  const RealVector d = quadratic_forms(S, sample_covariance(S));
  ConcentrationResult r;
  r.deviations = (d.array() - 1.0).abs().matrix();
  r.max_deviation = r.deviations.maxCoeff();
  return r;
}

InterlacingCheck leave_one_out_interlacing(const SampleSet& S, Index i) {
  const Index n = S.n();
  if (i < 0 || i >= n) throw DimensionError("leave_one_out_interlacing: index out of range");

  InterlacingCheck r;
  const Matrix full = sample_covariance(S);
  // S_(i) keeps the 1/n normalization of the full matrix.
  const Vector xi = S.X.col(i);
  const Matrix reduced = full - (xi * xi.adjoint()) / static_cast<double>(n);
  r.full = hermitian_eigenvalues(full);
  r.leave_one_out = hermitian_eigenvalues(reduced);

  const Index N = r.full.size();
  const double slack = 1e-10 * std::max(1.0, r.full(N - 1));
  r.holds = true;
  for (Index k = 0; k < N; ++k) {
    if (r.leave_one_out(k) > r.full(k) + slack) r.holds = false;
    if (k + 1 < N && r.full(k) > r.leave_one_out(k + 1) + slack) r.holds = false;
  }
  return r;
}

double mil_check(const Matrix& A, const Vector& x, double t) {
  if (A.rows() != A.cols() || A.rows() != x.size()) {
    throw DimensionError("mil_check: A must be square and match x");
  }
  Eigen::PartialPivLU<Matrix> luA(A);
  const Matrix perturbed = A + t * x * x.adjoint();
  Eigen::PartialPivLU<Matrix> luP(perturbed);
  if (!(luA.rcond() > 1e-14) || !(luP.rcond() > 1e-14)) {
    throw SingularityError("mil_check: singular input");
  }
  const Complex qa = x.dot(luA.solve(x));
  const Complex lhs = x.dot(luP.solve(x));
  const Complex rhs = qa / (1.0 + t * qa);
  return std::abs(lhs - rhs);
}

RankOneGap rank_one_perturbation_gap(const Matrix& B, const Matrix& A, const Vector& v, double x) {
  require_same_square(A, B, "rank_one_perturbation_gap");
  if (v.size() != A.rows()) throw DimensionError("rank_one_perturbation_gap: v size mismatch");
  if (!(x > 0.0)) throw DomainError("rank_one_perturbation_gap: x must be positive");

  const Index N = A.rows();
  const Matrix I = Matrix::Identity(N, N);
  const Matrix base = hermitian_part(A) + x * I;
  const Matrix bumped = base + v * v.adjoint();
  const Complex t0 = (B * Eigen::LLT<Matrix>(base).solve(I)).trace();
  const Complex t1 = (B * Eigen::LLT<Matrix>(bumped).solve(I)).trace();

  RankOneGap r;
  r.gap = std::abs(t1 - t0);
  r.bound = (N == 0 ? 0.0 : hermitian_eigenvalues(B).cwiseAbs().maxCoeff()) / x;
  r.holds = r.gap <= r.bound * (1.0 + 1e-12) + 1e-15;
  return r;
}

TraceProbe trace_concentration_probe(const Matrix& A, const EntryDistribution& dist, int trials,
                                     std::uint64_t seed) {
  if (A.rows() != A.cols()) throw DimensionError("trace_concentration_probe: A must be square");
  if (trials < 2) throw DomainError("trace_concentration_probe: need at least 2 trials");
  if (dist.variance() != 1.0) throw DomainError("trace_concentration_probe: entries need unit variance");

  const Index N = A.rows();
  const Complex trA = A.trace();
  RandomEngine rng(seed);
  std::vector<Complex> deltas;
  deltas.reserve(static_cast<std::size_t>(trials));
  for (int k = 0; k < trials; ++k) {
    const Vector y = generate_y(dist, N, 1, rng).col(0);
    deltas.push_back(y.dot(A * y) - trA);
  }

  TraceProbe p;
  p.trials = trials;
  Complex sum(0.0, 0.0);
  for (const auto& d : deltas) sum += d;
  p.mean = sum / static_cast<double>(trials);
  double ss = 0.0;
  for (const auto& d : deltas) ss += std::norm(d - p.mean);
  p.variance = ss / static_cast<double>(trials - 1);
  return p;
}

std::pair<double, double> mp_edges(double c, double scale) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("mp_edges: c must lie in (0, 1)");
  if (!(scale > 0.0)) throw DomainError("mp_edges: scale must be positive");
  const double r = std::sqrt(c);
  return {scale * (1.0 - r) * (1.0 - r), scale * (1.0 + r) * (1.0 + r)};
}

}  // namespace robcov
