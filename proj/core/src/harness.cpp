#include "robcov/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <thread>

#include <Eigen/LU>

#include "robcov/doa.hpp"
#include "robcov/errors.hpp"
#include "robcov/estimator.hpp"
#include "robcov/rmt.hpp"

namespace robcov {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct ExperimentName {
  ExperimentKind kind;
  const char* name;
};

constexpr ExperimentName kExperimentNames[] = {
    {ExperimentKind::Theorem1Gap, "theorem1_gap"},
    {ExperimentKind::Spacing, "spacing"},
    {ExperimentKind::Concentration, "concentration"},
    {ExperimentKind::EnValidation, "en_validation"},
    {ExperimentKind::LemmaChecks, "lemma_checks"},
    {ExperimentKind::SupportDiagnostic, "support_diagnostic"},
    {ExperimentKind::DoaCompare, "doa_compare"},
    {ExperimentKind::ExistenceIterations, "existence_iterations"},
};

// Rows of a single trial.
class TrialSink {
 public:
  TrialSink(std::string experiment, Index N, Index n, int trial)
      : experiment_(std::move(experiment)), N_(N), n_(n), trial_(trial) {}

  void add(std::string metric, double value) {
    rows_.push_back(ReportRow{experiment_, N_, n_, trial_, std::move(metric), value});
  }
  void fail() {
    rows_.clear();
    add("error", 1.0);
  }
  std::vector<ReportRow> take() { return std::move(rows_); }

 private:
  std::string experiment_;
  Index N_;
  Index n_;
  int trial_;
  std::vector<ReportRow> rows_;
};

SolverOptions solver_options(const ExperimentConfig& cfg) {
  SolverOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  return o;
}

Index latent_dim(const ExperimentConfig& cfg, Index N) {
  return std::max<Index>(N, static_cast<Index>(std::llround(cfg.m_ratio * static_cast<double>(N))));
}

SampleSet draw_samples(const ExperimentConfig& cfg, Index N, Index n, std::uint64_t seed) {
  return generate_samples(cfg.model, cfg.dist, N, latent_dim(cfg, N), n, seed);
}

Matrix random_gaussian(Index rows, Index cols, RandomEngine& rng) {
  return generate_y(EntryDistribution::gaussian_complex(), rows, cols, rng);
}

void trial_gap(const ExperimentConfig& cfg, Index N, Index n, std::uint64_t seed, TrialSink& out) {
  const SampleSet S = draw_samples(cfg, N, n, seed);
  const CovarianceEstimate est = robust_fixed_point(S, cfg.weight, solver_options(cfg));
  const Matrix S_hat = sample_covariance(S);
  const double scale = est.scale_reference;
  const double gap = spectral_norm_gap(scale * est.matrix, S_hat);
  const SpacingResult spacing = eigenvalue_spacing(est.matrix, S_hat, scale);
  out.add("norm_gap", gap);
  out.add("spacing_max", spacing.max);
  out.add("weyl_holds", spacing.max <= gap + 1e-10 ? 1.0 : 0.0);
  out.add("iterations", est.iterations);
}

void trial_concentration(const ExperimentConfig& cfg, Index N, Index n, std::uint64_t seed,
                         TrialSink& out) {
  const SampleSet S = draw_samples(cfg, N, n, seed);
  out.add("concentration_max", quadratic_concentration(S).max_deviation);
}

void trial_en(const ExperimentConfig& cfg, Index N, Index n, std::uint64_t seed, TrialSink& out) {
  const CovarianceFactor f = build_covariance(cfg.model, N, latent_dim(cfg, N));
  const RealVector lam = hermitian_eigenvalues(f.C);
  const std::vector<double> spectrum(lam.data(), lam.data() + lam.size());
  const double c = static_cast<double>(N) / static_cast<double>(n);
  const DeterministicEquivalent de = solve_eN(cfg.z, c, spectrum);

  const SampleSet S = draw_samples(cfg, N, n, seed);
  const double empirical = empirical_resolvent_trace(sample_covariance(S), f.C, cfg.z);
  out.add("e_N", de.e);
  out.add("en_residual", de.residual);
  out.add("empirical_trace", empirical);
  out.add("abs_error", std::abs(empirical - de.e));
}

void trial_lemmas(const ExperimentConfig& cfg, Index N, Index n, std::uint64_t seed,
                  TrialSink& out) {
  RandomEngine rng(stream_seed(seed, 7));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double dN = static_cast<double>(N);

  {
    const Matrix G = random_gaussian(N, N, rng);
    const Matrix A = G * G.adjoint() / dN + 0.5 * Matrix::Identity(N, N);
    const Vector x = random_gaussian(N, 1, rng).col(0);
    const double t = 2.0 * unif(rng);
    const double residual = mil_check(A, x, t);
    const double qa = std::abs(x.dot(A.partialPivLu().solve(x)));
    out.add("mil_residual", residual);
    out.add("mil_relative", residual / (1.0 + qa));
  }
  {
    const Matrix H = random_gaussian(N, N, rng);
    const Matrix G = random_gaussian(N, N, rng);
    const Matrix B = H * H.adjoint() / dN;
    const Matrix A = G * G.adjoint() / dN;
    const Vector v = random_gaussian(N, 1, rng).col(0);
    const double x = 0.1 + 1.9 * unif(rng);
    const RankOneGap r = rank_one_perturbation_gap(B, A, v, x);
    out.add("rank1_gap", r.gap);
    out.add("rank1_bound", r.bound);
    out.add("rank1_holds", r.holds ? 1.0 : 0.0);
  }
  {
    const SampleSet S = draw_samples(cfg, N, n, seed);
    const auto column = static_cast<Index>(seed % static_cast<std::uint64_t>(n));
    out.add("interlacing_holds", leave_one_out_interlacing(S, column).holds ? 1.0 : 0.0);
  }
}

double model_scale(const CovarianceModel& m) {
  return m.kind == CovarianceKind::ScaledIdentity ? m.scale : 1.0;
}

void trial_support(const ExperimentConfig& cfg, Index N, Index n, std::uint64_t seed,
                   TrialSink& out) {
  const SampleSet S = draw_samples(cfg, N, n, seed);
  const RealVector lam = hermitian_eigenvalues(sample_covariance(S));
  const auto [lower, upper] = mp_edges(S.c(), model_scale(cfg.model));
  const double lo = lam(0);
  const double hi = lam(lam.size() - 1);
  out.add("lambda_min", lo);
  out.add("lambda_max", hi);
  out.add("mp_lower", lower);
  out.add("mp_upper", upper);
  out.add("inside", (lo >= lower - cfg.edge_tol && hi <= upper + cfg.edge_tol) ? 1.0 : 0.0);
  if (cfg.leave_one_out) {
    double min_loo = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < S.n(); ++i) {
      min_loo = std::min(min_loo, leave_one_out_interlacing(S, i).leave_one_out(0));
    }
    out.add("min_loo_lambda1", min_loo);
  }
}

double angle_mse_deg2(std::vector<double> estimate, std::vector<double> truth) {
  std::sort(estimate.begin(), estimate.end());
  std::sort(truth.begin(), truth.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double e = (estimate[k] - truth[k]) / kDeg;
    acc += e * e;
  }
  return acc / static_cast<double>(truth.size());
}

void trial_doa(const ExperimentConfig& cfg, Index N, Index n, std::uint64_t seed, TrialSink& out) {
  ArrayScenario scn;
  scn.N = N;
  for (double t : cfg.doa.theta_deg) scn.theta.push_back(t * kDeg);
  scn.powers = cfg.doa.powers;
  scn.sigma2 = cfg.doa.sigma2;
  const Index K = scn.K();

  const Snapshots snaps = generate_snapshots(scn, n, cfg.doa.source_dist, cfg.dist, seed);
  const SampleSet& S = snaps.samples;
  const auto grid = angle_grid_deg(cfg.doa.grid_lo_deg, cfg.doa.grid_hi_deg, cfg.grid_deg);

  const Matrix S_hat = sample_covariance(S);
  const CovarianceEstimate est = robust_fixed_point(S, cfg.weight, solver_options(cfg));

  const PseudoSpectrum music = empirical_music_spectrum(S_hat, K, grid);
  const PseudoSpectrum plain = gmusic_spectrum(S_hat, n, K, grid);
  PseudoSpectrum robust = gmusic_spectrum(est.matrix, n, K, grid);
  robust.kind = SpectrumKind::RobustGMusic;

  double spectrum_gap = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    spectrum_gap = std::max(spectrum_gap, std::abs(robust.values[g] - plain.values[g]));
  }

  const std::pair<const char*, const PseudoSpectrum*> methods[] = {
      {"mse_music", &music}, {"mse_gmusic", &plain}, {"mse_robust", &robust}};
  for (const auto& [metric, ps] : methods) {
    try {
      out.add(metric, angle_mse_deg2(estimate_angles(*ps, K), scn.theta));
    } catch (const DetectionFailureError&) {
      out.add("error", 1.0);
    }
  }
  out.add("spectrum_gap", spectrum_gap);
  out.add("iterations", est.iterations);
}

void trial_existence(const ExperimentConfig& cfg, Index N, Index n, std::uint64_t seed,
                     TrialSink& out) {
  const SampleSet S = draw_samples(cfg, N, n, seed);
  const CovarianceEstimate est = robust_fixed_point(S, cfg.weight, solver_options(cfg));
  out.add("iterations", est.iterations);
  out.add("residual", est.residual);
  out.add("fixed_point_residual", fixed_point_residual(S, cfg.weight, est.matrix));
}

void run_trial(const ExperimentConfig& cfg, Index N, Index n, std::uint64_t seed, TrialSink& out) {
  switch (cfg.experiment) {
    case ExperimentKind::Theorem1Gap:
    case ExperimentKind::Spacing:
      trial_gap(cfg, N, n, seed, out);
      return;
    case ExperimentKind::Concentration:
      trial_concentration(cfg, N, n, seed, out);
      return;
    case ExperimentKind::EnValidation:
      trial_en(cfg, N, n, seed, out);
      return;
    case ExperimentKind::LemmaChecks:
      trial_lemmas(cfg, N, n, seed, out);
      return;
    case ExperimentKind::SupportDiagnostic:
      trial_support(cfg, N, n, seed, out);
      return;
    case ExperimentKind::DoaCompare:
      trial_doa(cfg, N, n, seed, out);
      return;
    case ExperimentKind::ExistenceIterations:
      trial_existence(cfg, N, n, seed, out);
      return;
  }
}

template <typename T>
T json_get(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& e : kExperimentNames)
    if (e.kind == kind) return e.name;
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& name) {
  for (const auto& e : kExperimentNames)
    if (name == e.name) return e.kind;
  throw ConfigError("unknown experiment '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (dims.empty()) throw ConfigError("config: dims must list at least one (N, n) pair");
  for (const auto& [N, n] : dims) {
    if (N < 1 || n < 1) throw ConfigError("config: dimensions must be positive");
    if (N >= n) throw ConfigError("config: every (N, n) pair needs N < n");
  }
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("config: tol must be positive");
  if (max_iter < 1) throw ConfigError("config: max_iter must be >= 1");
  if (!(m_ratio >= 1.0)) throw ConfigError("config: m_ratio must be >= 1");
  if (!(z < 0.0)) throw ConfigError("config: z must be negative");
  if (!(edge_tol >= 0.0)) throw ConfigError("config: edge_tol must be nonnegative");
  if (!(grid_deg > 0.0 && grid_deg <= 0.25)) {
    throw ConfigError("config: grid_deg must lie in (0, 0.25]");
  }
  try {
    model.validate();
    dist.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (experiment == ExperimentKind::SupportDiagnostic &&
      model.kind != CovarianceKind::Identity && model.kind != CovarianceKind::ScaledIdentity) {
    throw ConfigError("support_diagnostic needs an identity or scaled_identity model");
  }
  if (experiment == ExperimentKind::DoaCompare) {
    if (doa.theta_deg.empty()) throw ConfigError("doa: at least one source angle required");
    if (doa.theta_deg.size() != doa.powers.size()) throw ConfigError("doa: one power per angle");
    if (!dist.is_complex()) throw ConfigError("doa: noise distribution must be complex");
    if (!(doa.grid_hi_deg > doa.grid_lo_deg)) throw ConfigError("doa: empty angle grid");
    try {
      doa.source_dist.validate();
      for (const auto& [N, n] : dims) {
        ArrayScenario scn;
        scn.N = N;
        for (double t : doa.theta_deg) scn.theta.push_back(t * kDeg);
        scn.powers = doa.powers;
        scn.sigma2 = doa.sigma2;
        scn.validate();
      }
    } catch (const Error& e) {
      throw ConfigError(std::string("doa: ") + e.what());
    }
  }
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const char* const kKnown[] = {"experiment", "dims",  "model",    "dist",     "weight",
                                       "trials",     "seed",  "tol",      "max_iter", "grid_deg",
                                       "m_ratio",    "z",     "edge_tol", "doa",      "leave_one_out"};
  for (const auto& item : j.items()) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown),
                     [&](const char* k) { return item.key() == k; }) == std::end(kKnown)) {
      throw ConfigError("config: unknown field '" + item.key() + "'");
    }
  }

  ExperimentConfig cfg;
  try {
    if (!j.contains("experiment")) throw ConfigError("config: missing \"experiment\"");
    cfg.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    if (!j.contains("dims")) throw ConfigError("config: missing \"dims\"");
    for (const auto& d : j.at("dims")) {
      if (!d.is_array() || d.size() != 2) throw ConfigError("config: dims entries are [N, n]");
      cfg.dims.emplace_back(d.at(0).get<Index>(), d.at(1).get<Index>());
    }
    if (j.contains("model")) cfg.model = covariance_model_from_json(j.at("model"));
    if (j.contains("dist")) cfg.dist = entry_distribution_from_json(j.at("dist"));
    if (j.contains("weight")) cfg.weight = weight_from_json(j.at("weight"));
    cfg.trials = json_get(j, "trials", cfg.trials);
    cfg.seed = json_get(j, "seed", cfg.seed);
    cfg.tol = json_get(j, "tol", cfg.tol);
    cfg.max_iter = json_get(j, "max_iter", cfg.max_iter);
    cfg.grid_deg = json_get(j, "grid_deg", cfg.grid_deg);
    cfg.m_ratio = json_get(j, "m_ratio", cfg.m_ratio);
    cfg.z = json_get(j, "z", cfg.z);
    cfg.edge_tol = json_get(j, "edge_tol", cfg.edge_tol);
    cfg.leave_one_out = json_get(j, "leave_one_out", cfg.leave_one_out);
    if (j.contains("doa")) {
      const auto& d = j.at("doa");
      cfg.doa.theta_deg = json_get(d, "theta_deg", cfg.doa.theta_deg);
      cfg.doa.powers = json_get(d, "powers", cfg.doa.powers);
      cfg.doa.sigma2 = json_get(d, "sigma2", cfg.doa.sigma2);
      cfg.doa.grid_lo_deg = json_get(d, "grid_lo_deg", cfg.doa.grid_lo_deg);
      cfg.doa.grid_hi_deg = json_get(d, "grid_hi_deg", cfg.doa.grid_hi_deg);
      if (d.contains("source_dist")) {
        cfg.doa.source_dist = entry_distribution_from_json(d.at("source_dist"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& [N, n] : cfg.dims) dims.push_back({N, n});
  nlohmann::json j{
      {"experiment", to_string(cfg.experiment)},
      {"dims", dims},
      {"model", covariance_model_to_json(cfg.model)},
      {"dist", entry_distribution_to_json(cfg.dist)},
      {"weight", weight_to_json(cfg.weight)},
      {"trials", cfg.trials},
      {"seed", cfg.seed},
      {"tol", cfg.tol},
      {"max_iter", cfg.max_iter},
      {"grid_deg", cfg.grid_deg},
      {"m_ratio", cfg.m_ratio},
      {"z", cfg.z},
      {"edge_tol", cfg.edge_tol},
      {"leave_one_out", cfg.leave_one_out},
  };
  if (cfg.experiment == ExperimentKind::DoaCompare) {
    j["doa"] = {{"theta_deg", cfg.doa.theta_deg},
                {"powers", cfg.doa.powers},
                {"sigma2", cfg.doa.sigma2},
                {"grid_lo_deg", cfg.doa.grid_lo_deg},
                {"grid_hi_deg", cfg.doa.grid_hi_deg},
                {"source_dist", entry_distribution_to_json(cfg.doa.source_dist)}};
  }
  return j;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

int default_thread_count() {
  if (const char* env = std::getenv("ROBCOV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  struct Job {
    std::size_t dim;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < cfg.dims.size(); ++k)
    for (int t = 0; t < cfg.trials; ++t) jobs.push_back({k, t});

  std::vector<std::vector<ReportRow>> results(jobs.size());
  const std::string name = to_string(cfg.experiment);

  auto execute = [&](std::size_t j) {
    const auto [k, t] = jobs[j];
    const auto [N, n] = cfg.dims[k];
    const std::uint64_t seed =
        stream_seed(stream_seed(cfg.seed, k), static_cast<std::uint64_t>(t));
    TrialSink sink(name, N, n, t);
    try {
      run_trial(cfg, N, n, seed, sink);
    } catch (const std::exception&) {
      sink.fail();
    }
    results[j] = sink.take();
  };

  const int threads = std::max(1, opts.threads > 0 ? opts.threads : default_thread_count());
  if (threads == 1 || jobs.size() < 2) {
    for (std::size_t j = 0; j < jobs.size(); ++j) execute(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), jobs.size());
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) execute(j);
      });
    }
    for (auto& th : pool) th.join();
  }

  ExperimentReport report;
  for (auto& rows : results) {
    for (auto& row : rows) {
      if (!std::isfinite(row.value)) {
        row.metric_name = "error";
        row.value = 1.0;
      }
      report.rows.push_back(std::move(row));
    }
  }
  report.aggregates = aggregate_rows(report.rows);
  report.config_echo = config_to_json(cfg);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace robcov
