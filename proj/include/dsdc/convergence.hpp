#pragma once

// n-refinement studies: separating truncation-induced mass loss from gelation,
// and the fixed-step oracle comparison for the adaptive integrator.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dsdc/integrator.hpp"

namespace dsdc {

enum class TrendClass { conserving_trend, gelling_trend, inconclusive };

std::string to_string(TrendClass c);

struct SweepOptions {
  double T = 1.0;
  double delta = 0.01;
  std::size_t samples = 200;          ///< grid intervals per run
  double gel_time_stabilization = 0.1;  ///< relative change of the last two gel times
  double loss_ratio = 0.5;            ///< loss(n_max) < loss_ratio * loss(n_min)
  /// Slack on the loss fraction when testing that loss does not grow with n.
  double loss_floor = 1e-12;
  /// Runs with n <= oracle_max_n also get an oracle comparison (0 disables).
  std::size_t oracle_max_n = 0;
  double oracle_h = 1e-4;
};

struct ConvergenceReport {
  std::vector<std::size_t> n_list;
  std::vector<double> mass_retention;  ///< M1(T) / M1(0), 1 when M1(0) = 0
  std::vector<double> mass_loss;       ///< boundary outflow over [0, T] / M1(0), 0 when M1(0) = 0
  std::vector<double> initial_mass;    ///< M1(0) per n
  std::vector<std::optional<double>> gel_times;
  TrendClass classification = TrendClass::inconclusive;
  std::vector<std::optional<double>> oracle_errors;
  std::vector<std::string> failures;   ///< per-n failure message, empty on success
  SweepOptions options;
};

/// Independent integrations per n (run concurrently); the report is ordered by n.
ConvergenceReport refine_in_n(const KernelSpec& spec, const InitialData& family,
                              const std::vector<std::size_t>& n_list, const SweepOptions& opts,
                              const IntegratorConfig& cfg);

/// Classification rule applied to already populated per-n columns.
TrendClass classify_trend(const std::vector<double>& mass_loss,
                          const std::vector<std::optional<double>>& gel_times,
                          const SweepOptions& opts);

/// Max over samples and components of |a - b| / max(|b|, 1e-6 * max_k |b_k|) between
/// the adaptive run and a fixed-step RK4 run with step h_oracle.
double max_relative_discrepancy(const Trajectory& a, const Trajectory& b);

/// Adaptive vs fixed-step RK4. The oracle is also run at h/2 and must agree
/// with itself to 1e-9, else OracleInvalidError. Requires n <= 64.
double oracle_compare(const KernelSpec& spec, const State& init, double T,
                      const IntegratorConfig& cfg, double h_oracle, std::size_t samples = 20);

}  // namespace dsdc
