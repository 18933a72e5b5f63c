#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsdc/errors.hpp"
#include "dsdc/kernel.hpp"
#include "dsdc/truncated_system.hpp"

namespace dsdc {

enum class Method { adaptive_embedded_45, fixed_rk4 };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Step-control settings. All times are dimensionless.
struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  double h_init = 1e-6;
  double h_min = 1e-14;
  double h_max = 1.0;
  /// Negativity tolerated (and clamped to 0) after a step; defaults to
  /// 1e-12 times the largest initial concentration.
  std::optional<double> clamp_tol;
  Method method = Method::adaptive_embedded_45;
  double h_fixed = 1e-3;  ///< step of fixed_rk4
  std::size_t max_steps = 200'000'000;
  RhsPath rhs_path = RhsPath::automatic;

  void validate() const;

  bool operator==(const IntegratorConfig&) const = default;
};

/// Time integrals carried as extra state variables.
struct Accumulators {
  double theta_sq = 0.0;       ///< int (sum theta_i w_i)^2
  double m1_sq = 0.0;          ///< int M1^2
  double m0_sq = 0.0;          ///< int M0^2
  double total_coag = 0.0;     ///< int sum_i sum_{j>=i} Lambda_ij w_i w_j
  double boundary_flux = 0.0;  ///< int (n+1) w_n S_n, the mass leaving the truncation
  std::vector<double> tail_theta_sq;  ///< int (sum_{i>=r} theta_i w_i)^2 per cutoff r
  std::vector<double> tail_coag;      ///< int sum_{i,j>=r} Lambda_ij w_i w_j per cutoff r
};

struct Sample {
  State state;
  Accumulators acc;

  double t() const { return state.t; }
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t negativity_rejections = 0;
  std::size_t clamped = 0;
  std::size_t rhs_evals = 0;
};

struct Trajectory {
  KernelSpec spec;
  IntegratorConfig config;
  std::vector<std::size_t> tail_cutoffs;  ///< registered cutoffs r, ascending
  std::vector<Sample> samples;
  StepStats stats;
  double clamp_tol = 0.0;

  std::size_t n() const { return samples.empty() ? 0 : samples.front().state.n(); }
  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }

  /// Index of the sample at time t (matched to 1e-12 relative); throws ValidationError.
  std::size_t index_of(double t) const;
  const Sample& at(double t) const { return samples[index_of(t)]; }

  /// Position of cutoff r in tail_cutoffs; throws ValidationError when r was not registered.
  std::size_t cutoff_slot(std::size_t r) const;
};

/// Thrown when the step size underflows h_min or the step budget is exhausted.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, State last_good)
      : Error(what), last_good_(std::move(last_good)) {}
  const State& last_good() const { return last_good_; }

 private:
  State last_good_;
};

/// Advances the truncated system from `init` over the sample grid. The grid
/// must start at 0, increase strictly and end at or before T; the last sample
/// is always at T (appended when missing).
Trajectory integrate(const KernelSpec& spec, const State& init, double T,
                     std::vector<double> grid, const IntegratorConfig& cfg,
                     std::vector<std::size_t> tail_cutoffs = {});

/// 0, T/intervals, ..., T.
std::vector<double> uniform_grid(double T, std::size_t intervals);

/// Sample indices [first, last] spanning [t1, t2]. Both ends must be sample
/// times; fewer than 4 samples in the window throws InsufficientResolutionError.
std::pair<std::size_t, std::size_t> sample_window(const Trajectory& traj, double t1, double t2);

/// w_i(t2) - w_i(t1) - int_{t1}^{t2} rhs_i ds, trapezoid on the sample grid.
double solution_residual(const Trajectory& traj, std::size_t i, double t1, double t2);

}  // namespace dsdc
