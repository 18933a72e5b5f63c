#include "dsdc/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include <fmt/core.h>

#include "dsdc/diagnostics.hpp"

namespace dsdc {

namespace {

struct RunResult {
  double loss = 0.0;
  double initial_mass = 0.0;
  std::optional<double> gel_time;
  std::optional<double> oracle_error;
  std::string failure;
};

RunResult run_one(const KernelSpec& spec, const InitialData& family, std::size_t n,
                  const SweepOptions& opts, const IntegratorConfig& cfg) {
  RunResult out;
  try {
    const State init = make_initial_state(family, n);
    const auto traj = integrate(spec, init, opts.T, uniform_grid(opts.T, opts.samples), cfg);
    out.initial_mass = moment(init, 1.0);
    // Mass leaves the truncated system only through the boundary flux, which is
    // integrated directly and so avoids cancellation in 1 - M1(T)/M1(0).
    out.loss = out.initial_mass > 0.0 ? traj.back().acc.boundary_flux / out.initial_mass : 0.0;
    out.gel_time = estimate_gelation_time(traj, opts.delta);
    if (opts.oracle_max_n > 0 && n <= opts.oracle_max_n) {
      out.oracle_error = oracle_compare(spec, init, opts.T, cfg, opts.oracle_h);
    }
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  return out;
}

}  // namespace

std::string to_string(TrendClass c) {
  switch (c) {
    case TrendClass::conserving_trend: return "conserving_trend";
    case TrendClass::gelling_trend: return "gelling_trend";
    case TrendClass::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

TrendClass classify_trend(const std::vector<double>& mass_loss,
                          const std::vector<std::optional<double>>& gel_times,
                          const SweepOptions& opts) {
  const std::size_t m = mass_loss.size();
  if (m < 2 || gel_times.size() != m) return TrendClass::inconclusive;

  const bool all_gel = std::all_of(gel_times.begin(), gel_times.end(),
                                   [](const auto& g) { return g.has_value(); });
  if (all_gel) {
    const double last = *gel_times[m - 1];
    const double prev = *gel_times[m - 2];
    if (std::abs(last - prev) < opts.gel_time_stabilization * std::abs(last)) {
      return TrendClass::gelling_trend;
    }
    return TrendClass::inconclusive;
  }

  bool retention_nondecreasing = true;
  for (std::size_t k = 1; k < m; ++k) {
    if (mass_loss[k] > mass_loss[k - 1] + opts.loss_floor) retention_nondecreasing = false;
  }
  const double first = mass_loss.front();
  const double last = mass_loss.back();
  const bool shrinking = last == 0.0 || last < opts.loss_ratio * first;
  if (retention_nondecreasing && shrinking) return TrendClass::conserving_trend;
  return TrendClass::inconclusive;
}

ConvergenceReport refine_in_n(const KernelSpec& spec, const InitialData& family,
                              const std::vector<std::size_t>& n_list, const SweepOptions& opts,
                              const IntegratorConfig& cfg) {
  if (n_list.size() < 3) throw ValidationError("sweep needs at least 3 truncation sizes");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] == 0 || (k > 0 && n_list[k] <= n_list[k - 1])) {
      throw ValidationError("sweep.n_list must be strictly ascending positive integers");
    }
  }
  if (!(opts.delta > 0.0 && opts.delta < 1.0)) throw ValidationError("sweep.delta must lie in (0, 1)");
  cfg.validate();

  std::vector<std::future<RunResult>> jobs;
  jobs.reserve(n_list.size());
  for (std::size_t n : n_list) {
    jobs.push_back(std::async(std::launch::async, run_one, std::cref(spec), std::cref(family), n,
                              std::cref(opts), std::cref(cfg)));
  }

  ConvergenceReport rep;
  rep.n_list = n_list;
  rep.options = opts;
  bool failed = false;
  for (auto& job : jobs) {
    RunResult r = job.get();
    rep.mass_retention.push_back(1.0 - r.loss);
    rep.mass_loss.push_back(r.loss);
    rep.initial_mass.push_back(r.initial_mass);
    rep.gel_times.push_back(r.gel_time);
    rep.oracle_errors.push_back(r.oracle_error);
    failed = failed || !r.failure.empty();
    rep.failures.push_back(std::move(r.failure));
  }
  rep.classification =
      failed ? TrendClass::inconclusive : classify_trend(rep.mass_loss, rep.gel_times, opts);
  return rep;
}

double max_relative_discrepancy(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size() || a.n() != b.n()) {
    throw ValidationError("trajectories are sampled differently");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    const auto& wa = a.samples[k].state.omega;
    const auto& wb = b.samples[k].state.omega;
    double scale = 0.0;
    for (double v : wb) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < wa.size(); ++i) {
      const double denom = std::max(std::abs(wb[i]), 1e-6 * scale);
      if (denom > 0.0) worst = std::max(worst, std::abs(wa[i] - wb[i]) / denom);
    }
  }
  return worst;
}

double oracle_compare(const KernelSpec& spec, const State& init, double T,
                      const IntegratorConfig& cfg, double h_oracle, std::size_t samples) {
  if (init.n() > 64) throw ValidationError("oracle comparison is limited to n <= 64");
  if (!(h_oracle > 0.0)) throw ValidationError("oracle step must be positive");
  const auto grid = uniform_grid(T, samples);

  IntegratorConfig adaptive = cfg;
  adaptive.method = Method::adaptive_embedded_45;
  const auto run = integrate(spec, init, T, grid, adaptive);

  IntegratorConfig fixed = cfg;
  fixed.method = Method::fixed_rk4;
  fixed.h_fixed = h_oracle;
  const auto oracle = integrate(spec, init, T, grid, fixed);
  fixed.h_fixed = 0.5 * h_oracle;
  const auto oracle_half = integrate(spec, init, T, grid, fixed);

  const double self = max_relative_discrepancy(oracle, oracle_half);
  if (self >= 1e-9) {
    throw OracleInvalidError(
        fmt::format("oracle changes by {:.3e} under step halving (h = {})", self, h_oracle));
  }
  return max_relative_discrepancy(run, oracle_half);
}

}  // namespace dsdc
