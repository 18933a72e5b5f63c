#include "dsdc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <fmt/core.h>

#include "dsdc/convergence.hpp"
#include "dsdc/io.hpp"

namespace dsdc {

namespace {

// Never past the end of a tabulated kernel; below 8 nothing is probed.
std::size_t probe_size(const Trajectory& traj, const ChecksSection& checks) {
  const std::size_t n = checks.n_probe != 0 ? checks.n_probe : std::max<std::size_t>(traj.n(), 8);
  const auto m = traj.spec.max_index();
  return m ? std::min(n, *m) : n;
}

// Closest-to-failing report among evaluations at every positive sample time.
template <class F>
BoundReport worst_over_times(const Trajectory& traj, F&& check) {
  std::optional<BoundReport> worst;
  double worst_slack = 0.0;
  std::size_t evaluated = 0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    BoundReport r = check(traj.samples[k].t());
    if (!r.applicable) return r;
    ++evaluated;
    const double slack = r.rhs + r.tolerance_used - r.lhs;
    if (!worst || slack < worst_slack) {
      worst = std::move(r);
      worst_slack = slack;
    }
  }
  worst->params["samples_checked"] = static_cast<double>(evaluated);
  return *worst;
}

std::filesystem::path output_dir(const RunConfig& cfg, const RunOptions& opts) {
  std::filesystem::path dir = opts.out_dir ? *opts.out_dir : cfg.output.dir;
  std::filesystem::create_directories(dir);
  return dir;
}

void log(const RunOptions& opts, const std::string& msg) {
  if (!opts.quiet) fmt::print(stderr, "{}\n", msg);
}

}  // namespace

CertifiedConstants certify_constants(const Trajectory& traj, const ChecksSection& checks) {
  CertifiedConstants c;
  c.kappa0 = checks.kappa0;
  if (!c.kappa0) {
    if (const auto* p = std::get_if<PowerTheta>(&traj.spec.theta.form())) {
      if (2.0 * p->p > 1.0 && 2.0 * p->p < 2.0) c.kappa0 = 2.0 * p->p;
    }
  }
  const std::size_t n_probe = probe_size(traj, checks);
  if (n_probe < 8) {
    c.C = checks.C;
    c.zeta = checks.zeta;
    c.C_uniform = checks.C_uniform;
    return c;
  }
  c.probe = full_report(traj.spec, n_probe, c.kappa0.value_or(2.0));
  c.C = checks.C ? checks.C : (c.kappa0 ? c.probe.C : std::nullopt);
  c.zeta = checks.zeta ? checks.zeta : c.probe.zeta;
  c.C_uniform = checks.C_uniform ? checks.C_uniform : c.probe.uniform_min;
  return c;
}

Trajectory simulate(const RunConfig& cfg) {
  const State init = make_initial_state(cfg.init, cfg.run.n);
  return integrate(cfg.kernel, init, cfg.run.T, uniform_grid(cfg.run.T, cfg.run.samples), cfg.integrator,
                   cfg.run.tail_cutoffs);
}

std::vector<BoundReport> diagnose(const Trajectory& traj, const RunConfig& cfg) {
  const auto& ch = cfg.checks;
  const double t1 = ch.t1.value_or(0.0);
  const double t2 = ch.t2.value_or(traj.back().t());
  const CertifiedConstants k = certify_constants(traj, ch);

  std::vector<BoundReport> out;
  for (BoundId id : ch.bounds) {
    switch (id) {
      case BoundId::EST1:
        out.push_back(check_est1(traj, t1, t2));
        break;
      case BoundId::EST2:
        out.push_back(check_est2(traj, t1, t2));
        break;
      case BoundId::EST3:
        if (traj.tail_cutoffs.empty()) out.push_back(inapplicable(id, "no tail cutoffs registered"));
        for (std::size_t r : traj.tail_cutoffs) out.push_back(check_est3(traj, r, cfg.run.eta, t1, t2));
        break;
      case BoundId::TAILEST:
        if (traj.tail_cutoffs.empty()) out.push_back(inapplicable(id, "no tail cutoffs registered"));
        for (std::size_t r : traj.tail_cutoffs) out.push_back(check_tailest(traj, r, t1, t2));
        break;
      case BoundId::MASSRBND:
        out.push_back(worst_over_times(traj, [&](double t) { return check_massrbnd(traj, t); }));
        break;
      case BoundId::GEL_INFMASS:
        out.push_back(worst_over_times(traj, [&](double t) { return check_gel_infmass(traj, t); }));
        break;
      case BoundId::GEL_PRODUCT:
        if (!k.zeta) {
          out.push_back(inapplicable(id, "no positive zeta with Lambda >= zeta ij certified"));
        } else {
          out.push_back(worst_over_times(traj, [&](double t) { return check_gel_product(traj, *k.zeta, t); }));
        }
        break;
      case BoundId::GEL_M1INT:
        if (!k.kappa0 || !(*k.kappa0 < 2.0)) {
          out.push_back(inapplicable(id, "kappa0 in (1, 2) not given and not derivable from the kernel"));
        } else if (!k.C) {
          out.push_back(inapplicable(id, "no positive C with Lambda >= C (ij)^{kappa0/2} certified"));
        } else {
          out.push_back(check_m1_square_integral(traj, *k.C, *k.kappa0));
        }
        break;
      case BoundId::APPENDIX_M0:
        if (!k.C_uniform) {
          out.push_back(inapplicable(id, "no uniform lower bound Lambda >= C certified"));
        } else {
          out.push_back(check_appendix_m0(traj, *k.C_uniform));
        }
        break;
      case BoundId::AMC:
        out.push_back(check_amc(traj));
        break;
      case BoundId::FM:
        out.push_back(check_fm(traj));
        break;
    }
  }
  return out;
}

nlohmann::json report_document(const RunConfig& cfg, const Trajectory& traj,
                               const std::vector<BoundReport>& reports) {
  const CertifiedConstants k = certify_constants(traj, cfg.checks);
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json list = nlohmann::json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    list.push_back(to_json(r));
    if (r.applicable && !r.pass) all_pass = false;
  }
  const auto gel = estimate_gelation_time(traj, cfg.run.delta);
  return {{"version", kVersion},
          {"n", traj.n()},
          {"T", traj.back().t()},
          {"kernel",
           {{"declared_class", to_string(traj.spec.declared_class)},
            {"B", k.probe.B},
            {"A", opt(k.probe.A)},
            {"sublinear_trend", k.probe.sublinear_trend},
            {"kappa0", opt(k.kappa0)},
            {"C", opt(k.C)},
            {"zeta", opt(k.zeta)},
            {"C_uniform", opt(k.C_uniform)}}},
          {"step_stats",
           {{"accepted", traj.stats.accepted},
            {"rejected", traj.stats.rejected},
            {"negativity_rejections", traj.stats.negativity_rejections},
            {"clamped", traj.stats.clamped},
            {"rhs_evals", traj.stats.rhs_evals}}},
          {"delta", cfg.run.delta},
          {"gelation_time", opt(gel)},
          {"all_pass", all_pass},
          {"reports", list}};
}

int run(const RunConfig& cfg, Mode mode, const RunOptions& opts) {
  try {
    const auto dir = output_dir(cfg, opts);
    if (mode == Mode::sweep) {
      if (cfg.sweep.n_list.empty()) {
        log(opts, "sweep requires sweep.n_list");
        return kExitConfigError;
      }
      SweepOptions so;
      so.T = cfg.run.T;
      so.delta = cfg.sweep.delta;
      so.samples = cfg.run.samples;
      so.gel_time_stabilization = cfg.sweep.gel_time_stabilization;
      so.loss_ratio = cfg.sweep.loss_ratio;
      so.oracle_max_n = cfg.sweep.oracle_max_n;
      so.oracle_h = cfg.sweep.oracle_h;
      const auto rep = refine_in_n(cfg.kernel, cfg.init, cfg.sweep.n_list, so, cfg.integrator);
      write_json(to_json(rep), (dir / cfg.output.sweep).string());
      log(opts, fmt::format("sweep: {}", to_string(rep.classification)));
      for (const auto& f : rep.failures) {
        if (!f.empty()) {
          log(opts, fmt::format("integration failure: {}", f));
          return kExitNumericalFailure;
        }
      }
      return kExitOk;
    }

    const Trajectory traj = simulate(cfg);
    emit_csv(traj, (dir / cfg.output.csv).string(), cfg.output.head_size);
    if (mode == Mode::simulate) return kExitOk;

    const auto reports = diagnose(traj, cfg);
    write_json(report_document(cfg, traj, reports), (dir / cfg.output.report).string());
    int status = kExitOk;
    for (const auto& r : reports) {
      if (!r.applicable) {
        log(opts, fmt::format("{:<12} inapplicable: {}", to_string(r.bound_id), r.note));
      } else {
        log(opts, fmt::format("{:<12} {}  lhs={:.6e} rhs={:.6e} margin={:.3e}", to_string(r.bound_id),
                              r.pass ? "pass" : "FAIL", r.lhs, r.rhs, r.margin));
        if (!r.pass) status = kExitBoundFailure;
      }
    }
    return status;
  } catch (const IntegrationFailure& e) {
    log(opts, fmt::format("integration failure: {} (last good t = {})", e.what(), e.last_good().t));
    return kExitNumericalFailure;
  } catch (const NumericInputError& e) {
    log(opts, fmt::format("numerical failure: {}", e.what()));
    return kExitNumericalFailure;
  } catch (const Error& e) {
    log(opts, fmt::format("error: {}", e.what()));
    return kExitConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    log(opts, fmt::format("error: {}", e.what()));
    return kExitConfigError;
  }
}

int run_file(const std::string& config_path, Mode mode, const RunOptions& opts) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    log(opts, fmt::format("config error: {}", e.what()));
    return kExitConfigError;
  }
  return run(cfg, mode, opts);
}

}  // namespace dsdc
