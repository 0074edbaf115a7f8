#include "robcov/doa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "robcov/errors.hpp"

namespace robcov {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// sum_i weights_i |e_i^* s(theta)|^2 over the grid.
std::vector<double> weighted_projection(const Matrix& eigenvectors, const RealVector& weights,
                                        std::span<const double> grid) {
  const Index N = eigenvectors.rows();
  const Matrix Sg = steering_matrix(grid, N);
  const Matrix W = eigenvectors.adjoint() * Sg;
  std::vector<double> values(grid.size());
  for (Index g = 0; g < W.cols(); ++g) {
    double acc = 0.0;
    for (Index i = 0; i < W.rows(); ++i) acc += weights(i) * std::norm(W(i, g));
    values[static_cast<std::size_t>(g)] = acc;
  }
  return values;
}

void require_grid(std::span<const double> grid) {
  if (grid.empty()) throw DomainError("empty angle grid");
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (!(grid[g] > grid[g - 1])) throw DomainError("angle grid must be strictly increasing");
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> hermitian_eig(const Matrix& M) {
  if (M.rows() != M.cols()) throw DimensionError("expected a square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.adjoint()));
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
  return eig;
}

}  // namespace

void ArrayScenario::validate() const {
  if (N < 1) throw DomainError("scenario: N must be >= 1");
  if (theta.size() != powers.size()) throw DomainError("scenario: one power per angle");
  if (K() >= N) throw DomainError("scenario: need K < N");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("scenario: sigma2 must be > 0");
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!(powers[k] > 0.0) || !std::isfinite(powers[k]))
      throw DomainError("scenario: powers must be positive");
    if (!std::isfinite(theta[k])) throw DomainError("scenario: angles must be finite");
    for (std::size_t j = 0; j < k; ++j)
      if (theta[j] == theta[k]) throw DomainError("scenario: angles must be distinct");
  }
}

Vector steering_vector(double theta, Index N) {
  if (N < 1) throw DomainError("steering_vector: N must be >= 1");
  Vector s(N);
  const double phase = std::numbers::pi * std::sin(theta);
  const double norm = 1.0 / std::sqrt(static_cast<double>(N));
  for (Index m = 0; m < N; ++m) s(m) = std::polar(norm, phase * static_cast<double>(m));
  return s;
}

Matrix steering_matrix(std::span<const double> theta, Index N) {
  Matrix S(N, static_cast<Index>(theta.size()));
  for (std::size_t k = 0; k < theta.size(); ++k) {
    S.col(static_cast<Index>(k)) = steering_vector(theta[k], N);
  }
  return S;
}

Matrix population_covariance(const ArrayScenario& scn) {
  scn.validate();
  Matrix C = scn.sigma2 * Matrix::Identity(scn.N, scn.N);
  for (Index k = 0; k < scn.K(); ++k) {
    const Vector s = steering_vector(scn.theta[static_cast<std::size_t>(k)], scn.N);
    C.noalias() += scn.powers[static_cast<std::size_t>(k)] * s * s.adjoint();
  }
  return C;
}

std::string to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::TrueMusic:
      return "true_music";
    case SpectrumKind::EmpiricalMusic:
      return "empirical_music";
    case SpectrumKind::GMusic:
      return "gmusic";
    case SpectrumKind::RobustGMusic:
      return "robust_gmusic";
  }
  return "unknown";
}

std::vector<double> angle_grid_deg(double lo_deg, double hi_deg, double step_deg) {
  if (!(step_deg > 0.0) || !(hi_deg >= lo_deg)) {
    throw DomainError("angle_grid_deg: need step > 0 and hi >= lo");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t g = 0; g < count; ++g) {
    grid[g] = (lo_deg + step_deg * static_cast<double>(g)) * kDeg;
  }
  return grid;
}

PseudoSpectrum true_music_spectrum(const ArrayScenario& scn, std::span<const double> grid) {
  require_grid(grid);
  const Matrix C = population_covariance(scn);
  const auto eig = hermitian_eig(C);
  const RealVector& lam = eig.eigenvalues();
  const Index N = scn.N;
  const double tol = 1e-9 * std::max(1.0, lam(N - 1));

  RealVector noise_indicator = RealVector::Zero(N);
  Index noise_dim = 0;
  for (Index i = 0; i < N; ++i) {
    if (std::abs(lam(i) - scn.sigma2) <= tol) {
      noise_indicator(i) = 1.0;
      ++noise_dim;
    }
  }
  if (noise_dim != N - scn.K()) {
    std::ostringstream os;
    os << "noise eigenspace has dimension " << noise_dim << ", expected " << N - scn.K()
       << " (colliding steering vectors?)";
    throw DegenerateScenarioError(os.str());
  }

  PseudoSpectrum ps;
  ps.kind = SpectrumKind::TrueMusic;
  ps.grid.assign(grid.begin(), grid.end());
  ps.values = weighted_projection(eig.eigenvectors(), noise_indicator, grid);
  return ps;
}

GMusicWeights gmusic_weights(const RealVector& lambda_hat, Index n, Index K) {
  const Index N = lambda_hat.size();
  if (K < 0 || K >= N) throw DomainError("gmusic_weights: need 0 <= K < N");
  if (n <= N) throw DomainError("gmusic_weights: need n > N");
  for (Index i = 0; i < N; ++i) {
    if (!(lambda_hat(i) > 0.0) || !std::isfinite(lambda_hat(i)))
      throw DomainError("gmusic_weights: eigenvalues must be positive and finite");
    if (i > 0 && lambda_hat(i) < lambda_hat(i - 1))
      throw DomainError("gmusic_weights: eigenvalues must be sorted ascending");
  }

  const RealVector root = lambda_hat.cwiseSqrt();
  RealMatrix perturbed = lambda_hat.asDiagonal();
  perturbed -= (root * root.transpose()) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(perturbed, Eigen::EigenvaluesOnly);

  GMusicWeights out;
  out.mu_hat = eig.eigenvalues();

  const double floor = 1e-13 * lambda_hat(N - 1);
  const Index noise = N - K;
  auto term = [&](Index i, Index k) {
    const double dl = lambda_hat(i) - lambda_hat(k);
    const double dm = lambda_hat(i) - out.mu_hat(k);
    if (std::abs(dl) <= floor || std::abs(dm) <= floor) {
      std::ostringstream os;
      os << "gmusic_weights: degenerate spectrum at index pair (" << i << ", " << k << ")";
      throw DegenerateSpectrumError(os.str(), static_cast<std::size_t>(i),
                                    static_cast<std::size_t>(k));
    }
    return lambda_hat(k) / dl - out.mu_hat(k) / dm;
  };

  out.beta.resize(N);
  for (Index i = 0; i < N; ++i) {
    double acc = 0.0;
    if (i < noise) {
      for (Index k = noise; k < N; ++k) acc += term(i, k);
      out.beta(i) = 1.0 + acc;
    } else {
      for (Index k = 0; k < noise; ++k) acc += term(i, k);
      out.beta(i) = -acc;
    }
  }
  return out;
}

PseudoSpectrum empirical_music_spectrum(const Matrix& M, Index K, std::span<const double> grid) {
  require_grid(grid);
  const auto eig = hermitian_eig(M);
  const Index N = M.rows();
  if (K < 0 || K >= N) throw DomainError("empirical_music_spectrum: need 0 <= K < N");
  RealVector indicator = RealVector::Zero(N);
  indicator.head(N - K).setOnes();

  PseudoSpectrum ps;
  ps.kind = SpectrumKind::EmpiricalMusic;
  ps.grid.assign(grid.begin(), grid.end());
  ps.values = weighted_projection(eig.eigenvectors(), indicator, grid);
  return ps;
}

PseudoSpectrum gmusic_spectrum(const Matrix& M, Index n, Index K, std::span<const double> grid) {
  require_grid(grid);
  const auto eig = hermitian_eig(M);
  const GMusicWeights w = gmusic_weights(eig.eigenvalues(), n, K);

  PseudoSpectrum ps;
  ps.kind = SpectrumKind::GMusic;
  ps.grid.assign(grid.begin(), grid.end());
  ps.values = weighted_projection(eig.eigenvectors(), w.beta, grid);
  return ps;
}

PseudoSpectrum robust_gmusic_spectrum(const SampleSet& S, const WeightFunction& w, Index K,
                                      std::span<const double> grid, const SolverOptions& opts) {
  const CovarianceEstimate est = robust_fixed_point(S, w, opts);
  PseudoSpectrum ps = gmusic_spectrum(est.matrix, S.n(), K, grid);
  ps.kind = SpectrumKind::RobustGMusic;
  return ps;
}

std::vector<double> estimate_angles(const PseudoSpectrum& ps, Index K) {
  const auto& x = ps.grid;
  const auto& y = ps.values;
  if (x.size() != y.size()) throw DimensionError("estimate_angles: grid/values size mismatch");
  require_grid(x);
  if (K < 1) throw DomainError("estimate_angles: K must be >= 1");
  for (std::size_t g = 1; g < x.size(); ++g) {
    if (x[g] - x[g - 1] > 0.25 * kDeg * (1.0 + 1e-9)) {
      throw DomainError("estimate_angles: grid resolution must be 0.25 degrees or finer");
    }
  }

  struct Minimum {
    double angle;
    double value;
  };
  std::vector<Minimum> minima;
  for (std::size_t g = 1; g + 1 < y.size(); ++g) {
    if (!(y[g] < y[g - 1] && y[g] <= y[g + 1])) continue;
    // Vertex of the parabola through the three bracketing points.
    const double x0 = x[g - 1], x1 = x[g], x2 = x[g + 1];
    const double y0 = y[g - 1], y1 = y[g], y2 = y[g + 1];
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curvature = (d12 - d01) / (x2 - x0);
    Minimum m{x1, y1};
    if (curvature > 0.0) {
      const double b = d01 - curvature * (x0 + x1);
      const double vertex = -b / (2.0 * curvature);
      if (vertex > x0 && vertex < x2) {
        m.angle = vertex;
        m.value = y1 + (vertex - x1) * (d01 + curvature * (vertex - x0));
      }
    }
    minima.push_back(m);
  }
  if (static_cast<Index>(minima.size()) < K) {
    std::ostringstream os;
    os << "estimate_angles: found " << minima.size() << " local minima, need " << K;
    throw DetectionFailureError(os.str());
  }
  std::stable_sort(minima.begin(), minima.end(),
                   [](const Minimum& a, const Minimum& b) { return a.value < b.value; });
  std::vector<double> angles;
  angles.reserve(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) angles.push_back(minima[static_cast<std::size_t>(k)].angle);
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace robcov
