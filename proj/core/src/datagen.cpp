#include "robcov/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "robcov/doa.hpp"
#include "robcov/errors.hpp"

namespace robcov {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// ---------------------------------------------------------------------------

bool EntryDistribution::is_complex() const noexcept {
  return kind == EntryKind::GaussianComplex || kind == EntryKind::Qpsk ||
         kind == EntryKind::StudentTComplex;
}

double EntryDistribution::fourth_moment() const {
  switch (kind) {
    case EntryKind::GaussianComplex:
      return 2.0;
    case EntryKind::GaussianReal:
      return 3.0;
    case EntryKind::Qpsk:
      return 1.0;
    case EntryKind::StudentTNormalized:
    case EntryKind::StudentTComplex: {
      validate();
      const double kurt = 3.0 * (dof - 2.0) / (dof - 4.0);
      // Complex: independent real/imag parts of variance 1/2 each.
      return kind == EntryKind::StudentTNormalized ? kurt : 0.5 * (kurt + 1.0);
    }
  }
  return 0.0;
}

void EntryDistribution::validate() const {
  if (kind == EntryKind::StudentTNormalized || kind == EntryKind::StudentTComplex) {
    if (!(dof > kStudentDofFloor) || !std::isfinite(dof)) {
      std::ostringstream os;
      os << "student_t dof=" << dof << " has no finite (8+eta)-th moment; need dof > "
         << kStudentDofFloor;
      throw MomentConditionError(os.str());
    }
  }
}

std::string EntryDistribution::name() const {
  switch (kind) {
    case EntryKind::GaussianComplex:
      return "gaussian_complex";
    case EntryKind::GaussianReal:
      return "gaussian_real";
    case EntryKind::Qpsk:
      return "qpsk";
    case EntryKind::StudentTNormalized:
      return "student_t_normalized";
    case EntryKind::StudentTComplex:
      return "student_t_complex";
  }
  return "unknown";
}

EntryDistribution entry_distribution_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
    EntryDistribution d;
    if (kind == "gaussian_complex") {
      d = EntryDistribution::gaussian_complex();
    } else if (kind == "gaussian_real") {
      d = EntryDistribution::gaussian_real();
    } else if (kind == "qpsk") {
      d = EntryDistribution::qpsk();
    } else if (kind == "student_t_normalized" || kind == "student_t_complex") {
      if (!j.is_object() || !j.contains("dof")) throw ConfigError(kind + ": missing dof");
      const double dof = j.at("dof").get<double>();
      d = kind == "student_t_normalized" ? EntryDistribution::student_t(dof)
                                         : EntryDistribution::student_t_complex(dof);
    } else {
      throw ConfigError("unknown entry distribution '" + kind + "'");
    }
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("distribution: ") + e.what());
  } catch (const MomentConditionError& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json entry_distribution_to_json(const EntryDistribution& d) {
  nlohmann::json j{{"kind", d.name()}};
  if (d.kind == EntryKind::StudentTNormalized || d.kind == EntryKind::StudentTComplex) {
    j["dof"] = d.dof;
  }
  return j;
}

Matrix generate_y(const EntryDistribution& dist, Index M, Index n, RandomEngine& rng) {
  if (M < 1 || n < 1) throw DimensionError("generate_y: need M >= 1 and n >= 1");
  dist.validate();

  Matrix Y(M, n);
  switch (dist.kind) {
    case EntryKind::GaussianComplex: {
      std::normal_distribution<double> g(0.0, std::sqrt(0.5));
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < M; ++i) {
          const double re = g(rng);
          const double im = g(rng);
          Y(i, j) = Complex(re, im);
        }
      break;
    }
    case EntryKind::GaussianReal: {
      std::normal_distribution<double> g(0.0, 1.0);
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < M; ++i) Y(i, j) = Complex(g(rng), 0.0);
      break;
    }
    case EntryKind::Qpsk: {
      const double a = std::numbers::sqrt2 / 2.0;
      std::uniform_int_distribution<int> pick(0, 3);
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < M; ++i) {
          const int q = pick(rng);
          Y(i, j) = Complex((q & 1) ? a : -a, (q & 2) ? a : -a);
        }
      break;
    }
    case EntryKind::StudentTNormalized: {
      std::student_t_distribution<double> t(dist.dof);
      const double scale = std::sqrt((dist.dof - 2.0) / dist.dof);
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < M; ++i) Y(i, j) = Complex(scale * t(rng), 0.0);
      break;
    }
    case EntryKind::StudentTComplex: {
      std::student_t_distribution<double> t(dist.dof);
      const double scale = std::sqrt((dist.dof - 2.0) / dist.dof / 2.0);
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < M; ++i) {
          const double re = t(rng);
          const double im = t(rng);
          Y(i, j) = scale * Complex(re, im);
        }
      break;
    }
  }
  return Y;
}

Matrix generate_y(const EntryDistribution& dist, Index M, Index n, std::uint64_t seed) {
  RandomEngine rng(seed);
  return generate_y(dist, M, n, rng);
}

// ---------------------------------------------------------------------------

std::pair<double, double> CovarianceModel::bounds() const {
  switch (kind) {
    case CovarianceKind::Identity:
      return {1.0, 1.0};
    case CovarianceKind::ScaledIdentity:
      return {scale, scale};
    case CovarianceKind::Toeplitz:
      // Range of the symbol (1 - rho^2) / (1 - 2 rho cos w + rho^2).
      return {(1.0 - rho) / (1.0 + rho), (1.0 + rho) / (1.0 - rho)};
    case CovarianceKind::Spiked: {
      double lo = 1.0;
      double hi = 1.0;
      for (double s : spikes) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      return {lo, hi};
    }
  }
  return {1.0, 1.0};
}

void CovarianceModel::validate() const {
  switch (kind) {
    case CovarianceKind::Identity:
      break;
    case CovarianceKind::ScaledIdentity:
      if (!(scale > 0.0) || !std::isfinite(scale))
        throw DomainError("scaled_identity: scale must be positive");
      break;
    case CovarianceKind::Toeplitz:
      if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("toeplitz: rho must lie in [0, 1)");
      break;
    case CovarianceKind::Spiked:
      for (double s : spikes)
        if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("spiked: spikes must be positive");
      break;
  }
}

std::string CovarianceModel::name() const {
  switch (kind) {
    case CovarianceKind::Identity:
      return "identity";
    case CovarianceKind::ScaledIdentity:
      return "scaled_identity";
    case CovarianceKind::Toeplitz:
      return "toeplitz";
    case CovarianceKind::Spiked:
      return "spiked";
  }
  return "unknown";
}

CovarianceModel covariance_model_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
    CovarianceModel m;
    if (kind == "identity") {
      m = CovarianceModel::identity();
    } else if (kind == "scaled_identity") {
      m = CovarianceModel::scaled_identity(j.at("scale").get<double>());
    } else if (kind == "toeplitz") {
      m = CovarianceModel::toeplitz(j.at("rho").get<double>());
    } else if (kind == "spiked") {
      m = CovarianceModel::spiked(j.at("spikes").get<std::vector<double>>());
    } else {
      throw ConfigError("unknown covariance model '" + kind + "'");
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json covariance_model_to_json(const CovarianceModel& m) {
  nlohmann::json j{{"kind", m.name()}};
  switch (m.kind) {
    case CovarianceKind::ScaledIdentity:
      j["scale"] = m.scale;
      break;
    case CovarianceKind::Toeplitz:
      j["rho"] = m.rho;
      break;
    case CovarianceKind::Spiked:
      j["spikes"] = m.spikes;
      break;
    case CovarianceKind::Identity:
      break;
  }
  return j;
}

CovarianceFactor build_covariance(const CovarianceModel& model, Index N, Index M) {
  if (N < 1) throw DimensionError("build_covariance: N must be >= 1");
  if (M < N) throw DimensionError("build_covariance: need M >= N");
  model.validate();

  CovarianceFactor f;
  f.C = Matrix::Zero(N, N);
  Matrix root = Matrix::Zero(N, N);

  switch (model.kind) {
    case CovarianceKind::Identity:
    case CovarianceKind::ScaledIdentity: {
      const double s = model.kind == CovarianceKind::Identity ? 1.0 : model.scale;
      f.C.diagonal().setConstant(s);
      root.diagonal().setConstant(std::sqrt(s));
      break;
    }
    case CovarianceKind::Spiked: {
      if (static_cast<Index>(model.spikes.size()) > N) {
        throw DimensionError("spiked: more spikes than dimensions");
      }
      std::vector<double> diag(static_cast<std::size_t>(N), 1.0);
      std::vector<double> spikes = model.spikes;
      std::sort(spikes.begin(), spikes.end());
      const auto offset = static_cast<std::size_t>(N) - spikes.size();
      std::copy(spikes.begin(), spikes.end(), diag.begin() + static_cast<std::ptrdiff_t>(offset));
      for (Index i = 0; i < N; ++i) {
        const double v = diag[static_cast<std::size_t>(i)];
        f.C(i, i) = v;
        root(i, i) = std::sqrt(v);
      }
      break;
    }
    case CovarianceKind::Toeplitz: {
      for (Index j = 0; j < N; ++j)
        for (Index k = 0; k < N; ++k)
          f.C(j, k) = std::pow(model.rho, static_cast<double>(std::abs(j - k)));
      Eigen::SelfAdjointEigenSolver<Matrix> eig(f.C);
      const RealVector sq = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      root = eig.eigenvectors() * sq.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
      root = (0.5 * (root + root.adjoint())).eval();
      break;
    }
  }

  f.A = Matrix::Zero(N, M);
  f.A.leftCols(N) = root;
  return f;
}

SampleSet generate_samples(const CovarianceModel& model, const EntryDistribution& dist, Index N,
                           Index M, Index n, std::uint64_t seed) {
  const CovarianceFactor f = build_covariance(model, N, M);
  Matrix Y = generate_y(dist, M, n, seed);

  SampleSet s;
  // Identity models keep X = Y bit for bit.
  const bool identity = model.kind == CovarianceKind::Identity && M == N;
  s.X = identity ? std::move(Y) : Matrix(f.A * Y);
  s.M = M;
  s.is_complex = dist.is_complex();
  s.kind = model.name() + "/" + dist.name();
  s.seed = seed;
  return s;
}

Snapshots generate_snapshots(const ArrayScenario& scn, Index n, const EntryDistribution& source_dist,
                             const EntryDistribution& noise_dist, std::uint64_t seed) {
  scn.validate();
  if (n < 1) throw DimensionError("generate_snapshots: n must be >= 1");
  source_dist.validate();
  noise_dist.validate();

  const Index N = scn.N;
  const Index K = scn.K();
  const double sigma = std::sqrt(scn.sigma2);

  Snapshots out;
  out.A = Matrix::Zero(N, K + N);
  if (K > 0) {
    const Matrix S = steering_matrix(scn.theta, N);
    for (Index k = 0; k < K; ++k) {
      out.A.col(k) = std::sqrt(scn.powers[static_cast<std::size_t>(k)]) * S.col(k);
    }
  }
  out.A.rightCols(N).diagonal().setConstant(sigma);

  Matrix X = sigma * generate_y(noise_dist, N, n, stream_seed(seed, 1));
  if (K > 0) {
    const Matrix Z = generate_y(source_dist, K, n, stream_seed(seed, 0));
    X.noalias() += out.A.leftCols(K) * Z;
  }

  out.samples.X = std::move(X);
  out.samples.M = K + N;
  out.samples.is_complex = true;
  out.samples.kind = "snapshots/" + source_dist.name() + "+" + noise_dist.name();
  out.samples.seed = seed;
  return out;
}

}  // namespace robcov
