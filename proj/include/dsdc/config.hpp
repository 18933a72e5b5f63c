#pragma once

// Run configuration: a flat, sectioned key = value text format.
//
//   # comment
//   [kernel]
//   theta.form = power
//   theta.p = 1
//   [run]
//   n = 64
//
// Unknown sections and keys are rejected; every error names the key and line.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dsdc/convergence.hpp"
#include "dsdc/diagnostics.hpp"
#include "dsdc/integrator.hpp"
#include "dsdc/kernel.hpp"
#include "dsdc/truncated_system.hpp"

namespace dsdc {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct RunSection {
  std::size_t n = 64;
  double T = 1.0;
  std::size_t samples = 200;  ///< grid intervals
  std::vector<std::size_t> tail_cutoffs = {1, 2, 4, 8};
  double eta = 0.5;
  double delta = 0.01;

  bool operator==(const RunSection&) const = default;
};

struct ChecksSection {
  std::vector<BoundId> bounds = all_bound_ids();
  std::optional<double> C;          ///< Lambda >= C (ij)^{kappa0/2}
  std::optional<double> kappa0;
  std::optional<double> zeta;       ///< Lambda >= zeta ij
  std::optional<double> C_uniform;  ///< Lambda >= C_uniform
  std::optional<double> t1;         ///< window start for EST*/TAILEST (default 0)
  std::optional<double> t2;         ///< window end (default T)
  std::size_t n_probe = 0;          ///< 0 means max(n, 8)

  bool operator==(const ChecksSection&) const = default;
};

struct SweepSection {
  std::vector<std::size_t> n_list;
  double delta = 0.01;
  double gel_time_stabilization = 0.1;
  double loss_ratio = 0.5;
  std::size_t oracle_max_n = 0;
  double oracle_h = 1e-4;

  bool operator==(const SweepSection&) const = default;
};

struct OutputSection {
  std::string dir = ".";
  std::string csv = "trajectory.csv";
  std::string report = "report.json";
  std::string sweep = "sweep.json";
  std::size_t head_size = 8;

  bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
  KernelSpec kernel{ThetaSequence::power(1.0, 1.0), KappaModel::zero(), DeclaredClass::unclassified};
  InitialData init = Monodisperse{1.0};
  RunSection run;
  IntegratorConfig integrator;
  ChecksSection checks;
  SweepSection sweep;
  OutputSection output;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Serializes every field, so that parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& cfg);

}  // namespace dsdc
