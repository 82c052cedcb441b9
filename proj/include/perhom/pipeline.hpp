#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "perhom/cell_problem.hpp"
#include "perhom/drift.hpp"
#include "perhom/levy.hpp"

namespace perhom {

/// Every tolerance used by the pipeline checks.
struct Tolerances {
  double mass = 1e-10;                 // |int rho - 1| along the Fokker-Planck path
  double invariant_change = 1e-9;      // L1 change between invariant iterates
  double invariant_residual = 1e-6;    // ||L* rho||_{C^{beta-1}_2}
  double dense_difference = 1e-8;      // invariant density vs dense null vector
  double resolvent = 1e-10;            // Picard stopping tolerance
  double resolvent_residual = 1e-8;
  double poisson = 1e-9;               // outer Poisson iterates
  double poisson_residual = 1e-6;      // ||L chi + F - <F>_pi||_{C^beta_2}
  double mean_zero = 1e-8;             // |<F>_pi| required by the PDE experiment
  double clt_z = 4.0;                  // standard errors allowed in MC checks
};

struct McSettings {
  std::int64_t paths = 20000;
  double dt = 1e-3;
  double t = 1.0;                      // rescaled time; simulated horizon n t
  std::vector<double> n{16.0, 64.0};
  int checkpoints = 16;
  int batches = 50;
  std::int64_t level_paths = 2000;     // paths of the mollification-level comparison
};

struct PdeSettings {
  std::vector<double> epsilons{0.5, 0.25, 0.125};
  double t = 0.5;
  int steps = 1024;                    // minimum; raised to the stable count
};

struct GapSettings {
  double horizon = 0.0;                // 0: 25 / c_gap
  int steps = 0;
};

struct ExperimentConfig {
  std::string subcommand = "all";
  int dim = 1;
  int N = 64;
  double alpha = 2.0;
  double beta = -0.1;
  std::optional<double> gamma;         // default 2 beta + alpha - 1
  nlohmann::json measure;              // null: fractional Laplacian
  DriftSpec drift;
  std::uint64_t seed = 0;
  int threads = 0;
  McSettings mc;
  PdeSettings pde;
  GapSettings gap;
  Tolerances tol;
  std::string out = "out";
  std::string source;                  // config text as read, hashed into the report
};

/// Names the violated inequality of alpha in (1, 2], beta in ((2 - 2 alpha)/3, 0),
/// or returns nothing when (alpha, beta) is admissible.
std::optional<std::string> admissibility_violation(double alpha, double beta);

/// Parses and validates a config document; unknown keys and wrong types are
/// rejected with the offending path. Throws std::invalid_argument.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// A stage failed; carries the stage name.
struct StageError : std::runtime_error {
  StageError(std::string stage_name, const std::string& what)
      : std::runtime_error(stage_name + ": " + what), stage(std::move(stage_name)) {}
  std::string stage;
};

struct CheckResult {
  std::string stage;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

struct PdeRow {
  double epsilon = 0.0;
  int modes = 0;
  int steps = 0;
  double error = 0.0;  // max over probes of |u^eps_t - ubar_t|
};

struct PdeTable {
  double t = 0.0;
  double decay_rate = 0.0;  // ubar_t = e^{-t rate} sin(2 pi x_1)
  std::vector<Eigen::VectorXd> probes;
  std::vector<PdeRow> rows;
};

/// Eight fixed probe points off the collocation lattices.
std::vector<Eigen::VectorXd> pde_probe_points(int dim);

/// Backward equation with drift eps^{1-alpha} F(x/eps) on the N/eps grid from
/// f = sin(2 pi x_1), against the constant-coefficient limit. Refuses drifts
/// with |<F>_pi| above the tolerance.
PdeTable pde_homogenization_experiment(const PeriodicField& drift, const SphericalMeasure& measure, double beta,
                                       double gamma, const EffectiveModel& model, const PdeSettings& settings,
                                       double mean_tolerance);

struct PipelineResult {
  nlohmann::json report;
  std::vector<CheckResult> checks;
  bool pass = true;
};

/// Runs the stages required by cfg.subcommand, writes report.json, tables/*.csv
/// and fields/*.bin under cfg.out. Stage failures are written to the report
/// and rethrown as StageError.
PipelineResult run_pipeline(const ExperimentConfig& cfg);

}  // namespace perhom
