#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "robcov/errors.hpp"
#include "robcov/harness.hpp"

namespace {

using robcov::ExperimentConfig;
using robcov::ExperimentKind;
using robcov::ReportRow;

ExperimentConfig small_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  cfg.dims = {{10, 20}, {20, 40}};
  cfg.trials = 4;
  cfg.seed = 5;
  return cfg;
}

std::string csv(const robcov::ExperimentReport& r) {
  std::ostringstream os;
  robcov::emit_report(r, os, robcov::ReportFormat::Csv);
  return os.str();
}

std::string json(const robcov::ExperimentReport& r) {
  std::ostringstream os;
  robcov::emit_report(r, os, robcov::ReportFormat::Json);
  return os.str();
}

TEST(Quantile, Type7) {
  EXPECT_DOUBLE_EQ(robcov::quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(robcov::quantile({1.0, 2.0, 3.0, 4.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(robcov::quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.05), 1.2);
  EXPECT_DOUBLE_EQ(robcov::quantile({7.0}, 0.95), 7.0);
  EXPECT_THROW(robcov::quantile({}, 0.5), robcov::DomainError);
  EXPECT_THROW(robcov::quantile({1.0}, 1.5), robcov::DomainError);
}

TEST(BinomialTail, KnownValues) {
  EXPECT_DOUBLE_EQ(robcov::binomial_upper_tail(0, 10), 1.0);
  EXPECT_NEAR(robcov::binomial_upper_tail(10, 10), 1.0 / 1024.0, 1e-15);
  EXPECT_NEAR(robcov::binomial_upper_tail(9, 10), 11.0 / 1024.0, 1e-15);
  EXPECT_NEAR(robcov::binomial_upper_tail(5, 10), 638.0 / 1024.0, 1e-13);
  EXPECT_DOUBLE_EQ(robcov::binomial_upper_tail(11, 10), 0.0);
}

TEST(Report, EmptyIsHeaderOnly) {
  EXPECT_EQ(csv({}), "experiment,N,n,trial,metric_name,value\n");
}

TEST(Report, TwoRowsThreeLines) {
  robcov::ExperimentReport r;
  r.rows = {ReportRow{"spacing", 10, 20, 0, "spacing_max", 0.1},
            ReportRow{"spacing", 10, 20, 1, "spacing_max", 1.0 / 3.0}};
  r.aggregates = robcov::aggregate_rows(r.rows);
  const auto text = csv(r);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_NE(text.find("spacing,10,20,0,spacing_max,0.1\n"), std::string::npos);
  EXPECT_NE(text.find("0.3333333333333333"), std::string::npos);
}

TEST(Report, JsonRoundTrip) {
  const auto r = robcov::run_experiment(small_config(ExperimentKind::Spacing));
  const auto back = robcov::report_from_json(nlohmann::json::parse(json(r)));
  EXPECT_EQ(back.rows, r.rows);
  EXPECT_EQ(back.aggregates, r.aggregates);
  EXPECT_EQ(back.config_echo, r.config_echo);
  EXPECT_EQ(nlohmann::json::parse(json(r)).count("runtime_seconds"), 0u);
  std::ostringstream timed;
  robcov::emit_report(r, timed, robcov::ReportFormat::Json, true);
  EXPECT_EQ(nlohmann::json::parse(timed.str()).count("runtime_seconds"), 1u);
}

TEST(Report, AggregatesMatchRows) {
  const auto r = robcov::run_experiment(small_config(ExperimentKind::Theorem1Gap));
  for (const auto& a : r.aggregates) {
    const auto v = r.values(a.N, a.n, a.metric_name);
    EXPECT_EQ(a.count, static_cast<int>(v.size()));
    EXPECT_DOUBLE_EQ(a.median, robcov::oracle::median(v));
  }
  for (const auto& row : r.rows) EXPECT_TRUE(std::isfinite(row.value));
  ASSERT_NE(r.find(10, 20, "norm_gap"), nullptr);
  EXPECT_EQ(r.find(10, 20, "nope"), nullptr);
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  for (auto kind : {ExperimentKind::Theorem1Gap, ExperimentKind::LemmaChecks,
                    ExperimentKind::DoaCompare}) {
    auto cfg = small_config(kind);
    if (kind == ExperimentKind::DoaCompare) cfg.dims = {{8, 40}};
    const auto one = robcov::run_experiment(cfg, {1});
    const auto three = robcov::run_experiment(cfg, {3});
    EXPECT_EQ(csv(one), csv(three));
    EXPECT_EQ(json(one), json(three));
    EXPECT_EQ(csv(one), csv(robcov::run_experiment(cfg, {1})));
  }
}

TEST(RunExperiment, SeedChangesOutput) {
  auto cfg = small_config(ExperimentKind::Concentration);
  const auto a = csv(robcov::run_experiment(cfg));
  cfg.seed = 6;
  EXPECT_NE(a, csv(robcov::run_experiment(cfg)));
}

TEST(RunExperiment, EveryKindProducesMetrics) {
  const std::pair<ExperimentKind, const char*> expected[] = {
      {ExperimentKind::Theorem1Gap, "norm_gap"},
      {ExperimentKind::Spacing, "spacing_max"},
      {ExperimentKind::Concentration, "concentration_max"},
      {ExperimentKind::EnValidation, "e_N"},
      {ExperimentKind::LemmaChecks, "mil_residual"},
      {ExperimentKind::SupportDiagnostic, "inside"},
      {ExperimentKind::DoaCompare, "mse_gmusic"},
      {ExperimentKind::ExistenceIterations, "iterations"},
  };
  for (const auto& [kind, metric] : expected) {
    auto cfg = small_config(kind);
    if (kind == ExperimentKind::DoaCompare) cfg.dims = {{8, 40}};
    const auto r = robcov::run_experiment(cfg);
    const auto [N, n] = cfg.dims.front();
    EXPECT_NE(r.find(N, n, metric), nullptr) << robcov::to_string(kind);
    EXPECT_EQ(r.find(N, n, "error"), nullptr) << robcov::to_string(kind);
  }
}

TEST(RunExperiment, FailingTrialsBecomeErrorRows) {
  auto cfg = small_config(ExperimentKind::ExistenceIterations);
  cfg.max_iter = 1;
  const auto r = robcov::run_experiment(cfg);
  EXPECT_EQ(r.values(10, 20, "error").size(), 4u);
  for (double v : r.values(10, 20, "error")) EXPECT_EQ(v, 1.0);
}

TEST(RunExperiment, EnValidationClosedForm) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::EnValidation;
  cfg.dims = {{100, 200}};
  cfg.trials = 2;
  const auto r = robcov::run_experiment(cfg);
  for (double e : r.values(100, 200, "e_N"))
    EXPECT_NEAR(e, robcov::oracle::en_identity_half_minus_one(), 1e-9);
}

TEST(RunExperiment, ExistenceIterationsBudget) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::ExistenceIterations;
  cfg.dims = {{50, 200}};
  cfg.trials = 10;
  const auto r = robcov::run_experiment(cfg);
  ASSERT_NE(r.find(50, 200, "iterations"), nullptr);
  EXPECT_LE(r.find(50, 200, "iterations")->median, 100.0);
}

TEST(RunExperiment, NormGapDecreases) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::Theorem1Gap;
  cfg.dims = {{25, 50}, {50, 100}, {100, 200}};
  cfg.trials = 20;
  const auto r = robcov::run_experiment(cfg);
  EXPECT_GT(r.find(25, 50, "norm_gap")->median, r.find(50, 100, "norm_gap")->median);
  EXPECT_GT(r.find(50, 100, "norm_gap")->median, r.find(100, 200, "norm_gap")->median);
}

TEST(Config, ParseDefaultsAndRoundTrip) {
  const auto j = nlohmann::json::parse(R"({
    "experiment": "theorem1_gap",
    "dims": [[25, 50], [50, 100]],
    "weight": {"family": "huber", "phi_inf": 2.0},
    "dist": {"kind": "student_t_normalized", "dof": 12},
    "model": {"kind": "toeplitz", "rho": 0.3},
    "trials": 7,
    "seed": 99
  })");
  const auto cfg = robcov::config_from_json(j);
  EXPECT_EQ(cfg.experiment, ExperimentKind::Theorem1Gap);
  EXPECT_EQ(cfg.dims.size(), 2u);
  EXPECT_EQ(cfg.trials, 7);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_DOUBLE_EQ(cfg.tol, 1e-10);
  EXPECT_EQ(cfg.max_iter, 500);
  const auto again = robcov::config_from_json(robcov::config_to_json(cfg));
  EXPECT_EQ(robcov::config_to_json(again), robcov::config_to_json(cfg));
}

TEST(Config, Rejections) {
  const char* bad[] = {
      R"([])",
      R"({"dims": [[10, 20]]})",
      R"({"experiment": "theorem1_gap"})",
      R"({"experiment": "nope", "dims": [[10, 20]]})",
      R"({"experiment": "theorem1_gap", "dims": [[20, 20]]})",
      R"({"experiment": "theorem1_gap", "dims": [[10, 20]], "trials": 0})",
      R"({"experiment": "theorem1_gap", "dims": [[10, 20]], "typo": 1})",
      R"({"experiment": "theorem1_gap", "dims": [[10, 20]], "grid_deg": 0.5})",
      R"({"experiment": "theorem1_gap", "dims": [[10, 20]], "trials": "many"})",
      R"({"experiment": "theorem1_gap", "dims": [[10, 20, 30]]})",
  };
  for (const char* text : bad)
    EXPECT_THROW(robcov::config_from_json(nlohmann::json::parse(text)), robcov::ConfigError) << text;
  EXPECT_THROW(robcov::load_config_file("/nonexistent/config.json"), robcov::ConfigError);
}

TEST(ReportFormat, Parse) {
  EXPECT_EQ(robcov::report_format_from_string("csv"), robcov::ReportFormat::Csv);
  EXPECT_EQ(robcov::report_format_from_string("json"), robcov::ReportFormat::Json);
  EXPECT_THROW(robcov::report_format_from_string("xml"), robcov::ConfigError);
}

TEST(ExperimentKindNames, RoundTrip) {
  for (auto kind : {ExperimentKind::Theorem1Gap, ExperimentKind::Spacing,
                    ExperimentKind::Concentration, ExperimentKind::EnValidation,
                    ExperimentKind::LemmaChecks, ExperimentKind::SupportDiagnostic,
                    ExperimentKind::DoaCompare, ExperimentKind::ExistenceIterations})
    EXPECT_EQ(robcov::experiment_from_string(robcov::to_string(kind)), kind);
}

}  // namespace
