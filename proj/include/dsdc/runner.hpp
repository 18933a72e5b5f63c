#pragma once

// Run orchestration behind the command-line tool.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsdc/config.hpp"
#include "dsdc/diagnostics.hpp"
#include "dsdc/integrator.hpp"

namespace dsdc {

enum class Mode { simulate, check, sweep };

/// Process exit status of a run.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitBoundFailure = 2,
  kExitNumericalFailure = 3,
};

struct RunOptions {
  std::optional<std::string> out_dir;  ///< overrides output.dir
  bool quiet = false;
};

/// Constants the checks were evaluated with, after overrides and probing.
struct CertifiedConstants {
  ClassReport probe;
  std::optional<double> kappa0;
  std::optional<double> C;
  std::optional<double> zeta;
  std::optional<double> C_uniform;
};

CertifiedConstants certify_constants(const Trajectory& traj, const ChecksSection& checks);

/// Integrates the configured run.
Trajectory simulate(const RunConfig& cfg);

/// Evaluates every requested check. Pointwise-in-time bounds are evaluated at
/// every sample t > 0 and the closest-to-failing instance is reported.
std::vector<BoundReport> diagnose(const Trajectory& traj, const RunConfig& cfg);

nlohmann::json report_document(const RunConfig& cfg, const Trajectory& traj,
                               const std::vector<BoundReport>& reports);

/// Executes the run and writes its outputs; returns the exit status.
int run(const RunConfig& cfg, Mode mode, const RunOptions& opts = {});

/// load_config + run, mapping configuration errors to kExitConfigError.
int run_file(const std::string& config_path, Mode mode, const RunOptions& opts = {});

}  // namespace dsdc
