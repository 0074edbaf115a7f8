// robcov: command line front end for the experiment harness and DOA estimators.
//
//   robcov run --config exp.json --out gap.csv [--format csv|json] [--seed S] [--threads T]
//   robcov validate-weights --family huber --phi-inf 2
//   robcov doa --snapshots x.csv --k 2 --method robust --weight student_t:1.0
//   robcov simulate-doa --n 200 --sensors 20 --theta -10,15 --out x.csv
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robcov/datagen.hpp"
#include "robcov/doa.hpp"
#include "robcov/errors.hpp"
#include "robcov/estimator.hpp"
#include "robcov/harness.hpp"
#include "robcov/weights.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

constexpr double kDeg = std::numbers::pi / 180.0;

struct RunArgs {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool timing = false;
};

struct ValidateArgs {
  std::string family;
  double phi_inf = 0.0;
  double t = 0.0;
  double grid_max = 10.0;
  double grid_step = 0.01;
};

struct DoaArgs {
  std::string snapshots;
  int k = 0;
  std::string method = "robust";
  std::string weight = "student_t:1.0";
  double grid_deg = 0.1;
  double lo_deg = -90.0;
  double hi_deg = 90.0;
};

struct SimulateArgs {
  int n = 0;
  int sensors = 0;
  std::vector<double> theta_deg;
  std::vector<double> powers;
  double sigma2 = 1.0;
  std::string noise = "gaussian_complex";
  double dof = 9.0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  robcov::ExperimentConfig cfg;
  robcov::ReportFormat format;
  try {
    cfg = robcov::load_config_file(a.config);
    if (a.seed) cfg.seed = *a.seed;
    format = robcov::report_format_from_string(a.format);
  } catch (const robcov::Error& e) {
    std::cerr << "robcov run: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    robcov::RunOptions opts;
    opts.threads = a.threads;
    const auto report = robcov::run_experiment(cfg, opts);
    robcov::emit_report(report, a.out, format, a.timing);
    std::cerr << "wrote " << report.rows.size() << " rows to " << a.out << " in "
              << report.runtime_seconds << " s\n";
  } catch (const std::exception& e) {
    std::cerr << "robcov run: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_validate(const ValidateArgs& a) {
  std::optional<robcov::WeightFunction> w;
  try {
    if (a.family == "huber") {
      w = robcov::WeightFunction::huber(a.phi_inf);
    } else if (a.family == "student_t") {
      w = robcov::WeightFunction::student_t(a.t);
    } else {
      std::cerr << "robcov validate-weights: unknown family '" << a.family << "'\n";
      return kExitConfig;
    }
  } catch (const robcov::Error& e) {
    std::cerr << "robcov validate-weights: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!(a.grid_step > 0.0) || !(a.grid_max > 0.0)) {
    std::cerr << "robcov validate-weights: grid step and max must be positive\n";
    return kExitConfig;
  }
  std::vector<double> grid;
  const auto steps = static_cast<long>(std::floor(a.grid_max / a.grid_step + 1e-9));
  for (long i = 0; i <= steps; ++i) grid.push_back(a.grid_step * static_cast<double>(i));

  const auto report = robcov::validate(*w, grid);
  std::cout << "family: " << w->name() << '\n'
            << "phi_inf: " << report.phi_inf << '\n'
            << "phi_inverse(1): " << w->phi_inverse(1.0) << '\n'
            << "max phi on grid: " << report.max_phi_on_grid << '\n'
            << "valid: " << (report.valid ? "yes" : "no") << '\n';
  if (report.first_violation) {
    std::cout << "violation: " << report.first_violation->condition << " at s="
              << report.first_violation->s << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_doa(const DoaArgs& a) {
  std::optional<robcov::WeightFunction> w;
  std::vector<double> grid;
  try {
    w = robcov::parse_weight_spec(a.weight);
    if (a.method != "music" && a.method != "gmusic" && a.method != "robust") {
      throw robcov::ConfigError("unknown method '" + a.method + "'");
    }
    if (a.k < 1) throw robcov::ConfigError("--k must be >= 1");
    if (!(a.grid_deg > 0.0 && a.grid_deg <= 0.25)) {
      throw robcov::ConfigError("--grid-deg must lie in (0, 0.25]");
    }
    grid = robcov::angle_grid_deg(a.lo_deg, a.hi_deg, a.grid_deg);
  } catch (const robcov::Error& e) {
    std::cerr << "robcov doa: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto S = robcov::read_sample_csv_file(a.snapshots);
    robcov::PseudoSpectrum ps;
    if (a.method == "robust") {
      ps = robcov::robust_gmusic_spectrum(S, *w, a.k, grid);
    } else if (a.method == "gmusic") {
      ps = robcov::gmusic_spectrum(robcov::sample_covariance(S), S.n(), a.k, grid);
    } else {
      ps = robcov::empirical_music_spectrum(robcov::sample_covariance(S), a.k, grid);
    }
    std::cout.precision(6);
    std::cout << std::fixed;
    for (double theta : robcov::estimate_angles(ps, a.k)) std::cout << theta / kDeg << '\n';
  } catch (const std::exception& e) {
    std::cerr << "robcov doa: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_simulate(const SimulateArgs& a) {
  robcov::ArrayScenario scn;
  robcov::EntryDistribution noise;
  try {
    scn.N = a.sensors;
    for (double t : a.theta_deg) scn.theta.push_back(t * kDeg);
    scn.powers = a.powers.empty() ? std::vector<double>(a.theta_deg.size(), 1.0) : a.powers;
    scn.sigma2 = a.sigma2;
    scn.validate();
    if (a.n <= a.sensors) throw robcov::ConfigError("--n must exceed --sensors");
    if (a.noise == "gaussian_complex") {
      noise = robcov::EntryDistribution::gaussian_complex();
    } else if (a.noise == "student_t_complex") {
      noise = robcov::EntryDistribution::student_t_complex(a.dof);
    } else {
      throw robcov::ConfigError("unknown noise '" + a.noise + "'");
    }
    noise.validate();
  } catch (const robcov::Error& e) {
    std::cerr << "robcov simulate-doa: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto snaps = robcov::generate_snapshots(
        scn, a.n, robcov::EntryDistribution::gaussian_complex(), noise, a.seed);
    robcov::write_sample_csv_file(a.out, snaps.samples);
  } catch (const std::exception& e) {
    std::cerr << "robcov simulate-doa: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust M-estimation of covariance: experiments and robust G-MUSIC"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a Monte Carlo experiment from a JSON config");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out", run.out, "Report path")->required();
  run_cmd->add_option("--format", run.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Override the config seed");
  run_cmd->add_option("--threads", run.threads,
                      "Worker threads (default: $ROBCOV_THREADS, else 1)")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--timing", run.timing, "Include runtime_seconds in JSON reports");

  ValidateArgs val;
  auto* val_cmd =
      app.add_subcommand("validate-weights", "Check a weight function's monotonicity conditions");
  val_cmd->add_option("--family", val.family, "huber or student_t")->required();
  val_cmd->add_option("--phi-inf", val.phi_inf, "Huber saturation level (> 1)");
  val_cmd->add_option("--t", val.t, "Student-t weight parameter (> 0)");
  val_cmd->add_option("--grid-max", val.grid_max, "Largest grid point")->capture_default_str();
  val_cmd->add_option("--grid-step", val.grid_step, "Grid spacing")->capture_default_str();

  DoaArgs doa;
  auto* doa_cmd = app.add_subcommand("doa", "Estimate arrival angles from a snapshot CSV");
  doa_cmd->add_option("--snapshots", doa.snapshots, "Snapshot CSV")->required();
  doa_cmd->add_option("--k", doa.k, "Number of sources")->required();
  doa_cmd->add_option("--method", doa.method, "music, gmusic or robust")
      ->check(CLI::IsMember({"music", "gmusic", "robust"}))
      ->capture_default_str();
  doa_cmd->add_option("--weight", doa.weight, "huber:<phi_inf> or student_t:<t>")
      ->capture_default_str();
  doa_cmd->add_option("--grid-deg", doa.grid_deg, "Grid step in degrees (<= 0.25)")
      ->capture_default_str();
  doa_cmd->add_option("--lo-deg", doa.lo_deg, "Grid start")->capture_default_str();
  doa_cmd->add_option("--hi-deg", doa.hi_deg, "Grid end")->capture_default_str();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate-doa", "Write synthetic array snapshots to CSV");
  sim_cmd->add_option("--n", sim.n, "Snapshots")->required();
  sim_cmd->add_option("--sensors", sim.sensors, "Array size N")->required();
  sim_cmd->add_option("--theta", sim.theta_deg, "Source angles in degrees")
      ->delimiter(',')
      ->required();
  sim_cmd->add_option("--powers", sim.powers, "Source powers (default 1 each)")->delimiter(',');
  sim_cmd->add_option("--sigma2", sim.sigma2, "Noise variance")->capture_default_str();
  sim_cmd->add_option("--noise", sim.noise, "gaussian_complex or student_t_complex")
      ->capture_default_str();
  sim_cmd->add_option("--dof", sim.dof, "Student-t degrees of freedom (> 8)")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }

  if (*run_cmd) return cmd_run(run);
  if (*val_cmd) return cmd_validate(val);
  if (*doa_cmd) return cmd_doa(doa);
  if (*sim_cmd) return cmd_simulate(sim);
  return kExitConfig;
}
