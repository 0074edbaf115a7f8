#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "robcov/datagen.hpp"
#include "robcov/types.hpp"
#include "robcov/weights.hpp"

namespace robcov {

enum class ExperimentKind {
  Theorem1Gap,
  Spacing,
  Concentration,
  EnValidation,
  LemmaChecks,
  SupportDiagnostic,
  DoaCompare,
  ExistenceIterations,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);

/// Scenario for doa_compare; the sensor count comes from each (N, n) pair.
struct DoaSettings {
  std::vector<double> theta_deg{-10.0, 15.0};
  std::vector<double> powers{1.0, 1.0};
  double sigma2 = 1.0;
  EntryDistribution source_dist = EntryDistribution::gaussian_complex();
  double grid_lo_deg = -90.0;
  double grid_hi_deg = 90.0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Theorem1Gap;
  std::vector<std::pair<Index, Index>> dims;
  CovarianceModel model = CovarianceModel::identity();
  EntryDistribution dist = EntryDistribution::gaussian_complex();
  WeightFunction weight = WeightFunction::student_t(1.0);
  int trials = 20;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int max_iter = 500;
  /// DOA grid step in degrees.
  double grid_deg = 0.1;
  /// M = round(m_ratio * N), m_ratio >= 1.
  double m_ratio = 1.0;
  /// Evaluation point of the deterministic equivalent (en_validation).
  double z = -1.0;
  /// Absolute slack around the Marchenko-Pastur edges (support_diagnostic).
  double edge_tol = 0.15;
  /// support_diagnostic also reports min_i lambda_1 of the leave-one-out matrices.
  bool leave_one_out = false;
  DoaSettings doa;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config_file(const std::string& path);

struct ReportRow {
  std::string experiment;
  Index N = 0;
  Index n = 0;
  int trial = 0;
  std::string metric_name;
  double value = 0.0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct Aggregate {
  Index N = 0;
  Index n = 0;
  std::string metric_name;
  double median = 0.0;
  double p05 = 0.0;
  double p95 = 0.0;
  int count = 0;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  /// One entry per (N, n, metric_name), in first-appearance order of the rows.
  std::vector<Aggregate> aggregates;
  nlohmann::json config_echo;
  double runtime_seconds = 0.0;

  /// Aggregate for (N, n, metric) or nullptr.
  const Aggregate* find(Index N, Index n, const std::string& metric) const;
  /// Row values of a metric for one dimension pair, in trial order.
  std::vector<double> values(Index N, Index n, const std::string& metric) const;
};

struct RunOptions {
  /// Worker threads; 0 means ROBCOV_THREADS from the environment, else 1.
  int threads = 0;
};

/// Thread count from ROBCOV_THREADS (>= 1), or 1 when unset/invalid.
int default_thread_count();

/// Runs every (N, n) x trial of the experiment. Trial t of dims entry k draws from
/// stream_seed(stream_seed(seed, k), t) so results do not depend on the thread count.
/// Per-trial failures become rows with metric_name "error".
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Linear-interpolation quantile (R type 7) of unsorted data.
double quantile(std::vector<double> values, double p);

/// Recomputes aggregates from rows.
std::vector<Aggregate> aggregate_rows(const std::vector<ReportRow>& rows);

enum class ReportFormat { Csv, Json };

ReportFormat report_format_from_string(const std::string& name);

/// CSV: header experiment,N,n,trial,metric_name,value then one line per row.
/// JSON: {"config", "rows", "aggregates"} plus "runtime_seconds" when include_timing.
void emit_report(const ExperimentReport& r, std::ostream& os, ReportFormat format,
                 bool include_timing = false);
void emit_report(const ExperimentReport& r, const std::string& path, ReportFormat format,
                 bool include_timing = false);

nlohmann::json report_to_json(const ExperimentReport& r, bool include_timing = false);
ExperimentReport report_from_json(const nlohmann::json& j);

/// P(X >= k) for X ~ Binomial(trials, 1/2).
double binomial_upper_tail(int k, int trials);

}  // namespace robcov
