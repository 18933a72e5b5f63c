// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <unistd.h>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "dsdc/convergence.hpp"
#include "dsdc/diagnostics.hpp"
#include "dsdc/integrator.hpp"
#include "dsdc/kernel.hpp"
#include "dsdc/runner.hpp"
#include "dsdc/truncated_system.hpp"

using namespace dsdc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

KernelSpec power_kernel(double p, double c = 0.0) {
  return {ThetaSequence::power(1.0, p), c == 0.0 ? KappaModel::zero() : KappaModel::scaled_product(c)};
}

// n=16, Lambda = ij, monodisperse(1), T=2 on a 2000-interval grid.
constexpr std::size_t kReferenceIntervals = 2000;

Trajectory reference_run() {
  return integrate(power_kernel(1.0), make_initial_state(Monodisperse{1.0}, 16), 2.0,
                   uniform_grid(2.0, kReferenceIntervals), IntegratorConfig{});
}

Outcome closed_form() {
  const auto t0 = Clock::now();
  const Trajectory tr = integrate(power_kernel(0.0), make_initial_state(Monodisperse{1.0}, 1), 10.0,
                                  uniform_grid(10.0, 1000), IntegratorConfig{});
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (const auto& s : tr.samples) {
    const double exact = 1.0 / (1.0 + 2.0 * s.t());
    worst = std::max(worst, std::abs(s.state.omega[0] - exact) / exact);
  }
  return {worst <= 1e-8 && elapsed < 1.0, fmt::format("max rel err {:.3e}, {:.3f} s", worst, elapsed)};
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  const double d = oracle_compare(power_kernel(1.0), make_initial_state(Monodisperse{1.0}, 16), 2.0,
                                  IntegratorConfig{}, 1e-5);
  const double elapsed = seconds_since(t0);
  return {d <= 1e-6 && elapsed < 30.0, fmt::format("discrepancy {:.3e}, {:.2f} s", d, elapsed)};
}

// Nonneg data with a random support, random decay and random sparsity.
std::vector<double> random_data(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t support = 1 + static_cast<std::size_t>(u(rng) * static_cast<double>(n - 1));
  const double decay = 3.0 * u(rng);
  const double keep = 0.3 + 0.7 * u(rng);
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < support; ++i) {
    if (u(rng) < keep) w[i] = u(rng) * std::pow(static_cast<double>(i + 1), -decay);
  }
  if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[0] = 1.0;
  return w;
}

Outcome randomized_suite() {
  std::mt19937_64 rng(20240601);
  const double ps[] = {0.5, 0.75, 1.0};
  const double cs[] = {0.0, 0.5};
  const std::vector<std::size_t> cutoffs = {2, 4, 8};
  const double T = 5.0;
  const std::pair<double, double> windows[] = {{0.0, 5.0}, {0.0, 1.0}, {1.0, 5.0}, {2.5, 5.0}};
  std::size_t checks = 0;
  std::size_t failures = 0;
  double worst_slack = INFINITY;
  std::string first_failure;
  auto record = [&](const BoundReport& r, int case_no) {
    ++checks;
    worst_slack = std::min(worst_slack, r.margin + r.tolerance_used);
    if (!r.pass) {
      ++failures;
      if (first_failure.empty()) {
        first_failure = fmt::format("; first failure case {} {} lhs={:.6e} rhs={:.6e}", case_no,
                                    to_string(r.bound_id), r.lhs, r.rhs);
      }
    }
  };
  for (int k = 0; k < 20; ++k) {
    const double p = ps[k % 3];
    const double c = cs[(k / 3) % 2];
    const State init = make_initial_state(TableInit{random_data(rng, 64)}, 64);
    const Trajectory tr = integrate(power_kernel(p, c), init, T, uniform_grid(T, 100), IntegratorConfig{}, cutoffs);
    for (const auto& [t1, t2] : windows) {
      record(check_est1(tr, t1, t2), k);
      record(check_est2(tr, t1, t2), k);
      for (std::size_t r : cutoffs) {
        record(check_est3(tr, r, 0.5, t1, t2), k);
        record(check_tailest(tr, r, t1, t2), k);
      }
    }
  }
  return {failures == 0, fmt::format("{} checks, {} failures, min slack {:.3e}{}", checks, failures, worst_slack,
                                     first_failure)};
}

Outcome infinite_mass_bound() {
  const Trajectory tr = integrate(power_kernel(1.0), make_initial_state(PowerTail{1.0, 1.5}, 256), 10.0,
                                  uniform_grid(10.0, 200), IntegratorConfig{});
  std::size_t failures = 0;
  double min_margin = INFINITY;
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    const BoundReport r = check_massrbnd(tr, tr.samples[k].t());
    if (!r.pass) ++failures;
    min_margin = std::min(min_margin, r.margin);
  }
  return {failures == 0, fmt::format("M1(0)={:.4f}, {} sample failures, min margin {:.3e}",
                                     moment(tr.front().state, 1.0), failures, min_margin)};
}

Outcome product_kernel_gelation() {
  const KernelSpec spec = power_kernel(1.0);
  const Trajectory tr = integrate(spec, make_initial_state(Monodisperse{1.0}, 256), 10.0, uniform_grid(10.0, 200),
                                  IntegratorConfig{});
  std::size_t failures = 0;
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    if (!check_gel_product(tr, 1.0, tr.samples[k].t()).pass) ++failures;
  }
  SweepOptions so;
  so.T = 10.0;
  so.delta = 0.1;
  const ConvergenceReport rep = refine_in_n(spec, Monodisperse{1.0}, {128, 256, 512}, so, IntegratorConfig{});
  const auto& g = rep.gel_times;
  const bool finite = g[1] && g[2];
  const double change = finite ? std::abs(*g[2] - *g[1]) / *g[2] : INFINITY;
  return {failures == 0 && finite && change < 0.1 && rep.classification == TrendClass::gelling_trend,
          fmt::format("{} bound failures, T_gel(256)={:.6f}, T_gel(512)={:.6f}, change {:.3e}, {}", failures,
                      g[1].value_or(NAN), g[2].value_or(NAN), change, to_string(rep.classification))};
}

Outcome m1_square_integral() {
  const Trajectory tr = integrate(power_kernel(0.75), make_initial_state(Monodisperse{1.0}, 256), 50.0,
                                  uniform_grid(50.0, 200), IntegratorConfig{});
  const BoundReport r = check_m1_square_integral(tr, 1.0, 1.5);
  return {r.pass, fmt::format("lhs={:.6e} rhs={:.6e} (jota={:.9f})", r.lhs, r.rhs, series_zeta(1.25))};
}

Outcome appendix_m0() {
  const Trajectory tr = integrate(power_kernel(0.0), make_initial_state(Monodisperse{1.0}, 128), 50.0,
                                  uniform_grid(50.0, 200), IntegratorConfig{});
  const BoundReport r = check_appendix_m0(tr, 1.0);
  const double ratio = moment(tr.back().state, 0.0) / moment(tr.front().state, 0.0);
  return {r.pass && ratio < 0.2,
          fmt::format("I_M0_sq={:.6e} <= {:.6e}, M0(T)/M0(0)={:.4e}", r.lhs, r.rhs, ratio)};
}

Outcome bounded_kernel_retention() {
  SweepOptions so;
  so.T = 1.0;
  so.delta = 0.1;
  const ConvergenceReport rep =
      refine_in_n(power_kernel(0.0), Monodisperse{1.0}, {64, 128, 256, 512}, so, IntegratorConfig{});
  bool monotone = true;
  for (std::size_t k = 1; k < rep.mass_loss.size(); ++k) {
    monotone = monotone && rep.mass_loss[k] <= rep.mass_loss[k - 1];
  }
  const double loss_small = rep.mass_loss.front();
  const double loss_large = rep.mass_loss.back();
  const bool halved = loss_large < 0.5 * loss_small;
  return {monotone && halved && rep.classification == TrendClass::conserving_trend,
          fmt::format("loss(64)={:.3e}, loss(512)={:.3e}, {}", loss_small, loss_large,
                      to_string(rep.classification))};
}

Outcome fast_path() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const KernelSpec spec = power_kernel(1.0, 0.5);
  double worst = 0.0;
  for (std::size_t n : {64, 1024}) {
    State s{0.0, std::vector<double>(n)};
    for (auto& w : s.omega) w = u(rng);
    const auto g = rhs_general(spec, s);
    const auto f = rhs_separable_fast(spec, s);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(f[i] - g[i]) / std::abs(g[i]));
  }

  const std::size_t n = 4096;
  std::vector<double> omega(n);
  for (auto& w : omega) w = u(rng);
  const RhsEvaluator fast(spec, n, RhsPath::separable);
  const RhsEvaluator general(spec, n, RhsPath::general);
  std::vector<double> out(n);
  RhsSums sums;
  auto time_100 = [&](const RhsEvaluator& ev) {
    const auto t0 = Clock::now();
    for (int k = 0; k < 100; ++k) ev.evaluate(omega, out, sums);
    return seconds_since(t0);
  };
  const double t_fast = time_100(fast);
  const double t_general = time_100(general);
  return {worst <= 1e-12 && 5.0 * t_fast <= t_general,
          fmt::format("max rel diff {:.3e}, fast {:.4f} s vs general {:.4f} s (ratio {:.0f})", worst, t_fast,
                      t_general, t_general / t_fast)};
}

Outcome weak_form(const Trajectory& ref) {
  const std::pair<const char*, TestSequence> psis[] = {
      {"constant_one", ConstantOne{}}, {"identity", Identity{}}, {"capped(8)", Capped{8}}, {"power(0.5)", PowerSequence{0.5}}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, psi] : psis) {
    const double res = weak_form_residual(ref, psi, 0.0, 2.0);
    ok = ok && std::abs(res) <= 1e-5;
    detail += fmt::format("{}{}={:.2e}", detail.empty() ? "" : ", ", name, res);
  }
  return {ok, detail};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  RunConfig cfg;
  cfg.kernel = power_kernel(1.0);
  cfg.init = Monodisperse{1.0};
  cfg.run.n = 16;
  cfg.run.T = 2.0;
  cfg.run.samples = kReferenceIntervals;
  cfg.run.tail_cutoffs = {1, 2, 4, 8};
  const auto base = std::filesystem::temp_directory_path() / fmt::format("dsdc_acceptance_{}", ::getpid());
  RunOptions opts;
  opts.quiet = true;
  std::string csv[2], json[2];
  int codes[2];
  for (int k = 0; k < 2; ++k) {
    opts.out_dir = (base / std::to_string(k)).string();
    codes[k] = run(cfg, Mode::check, opts);
    csv[k] = slurp(base / std::to_string(k) / cfg.output.csv);
    json[k] = slurp(base / std::to_string(k) / cfg.output.report);
  }
  std::filesystem::remove_all(base);
  const bool same = csv[0] == csv[1] && json[0] == json[1] && !csv[0].empty() && !json[0].empty();
  return {same && codes[0] == codes[1],
          fmt::format("csv {} bytes, json {} bytes, identical={}, exit codes {}/{}", csv[0].size(), json[0].size(),
                      same, codes[0], codes[1])};
}

}  // namespace

int main() {
  const Trajectory ref = reference_run();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"closed-form n=1 reproduction", closed_form},
      {"adaptive vs fixed-step oracle (n=16, ij)", oracle_equivalence},
      {"randomized EST1/EST2/EST3/TAILEST suite", randomized_suite},
      {"t^{-1/2} mass bound with power-tail data", infinite_mass_bound},
      {"product-kernel gelation bound and T_gel trend", product_kernel_gelation},
      {"integral of M1^2 bound, (ij)^0.75", m1_square_integral},
      {"M0 decay for constant kernel", appendix_m0},
      {"bounded-kernel mass retention trend", bounded_kernel_retention},
      {"separable fast path equivalence and speed", fast_path},
      {"weak-form identity residuals", [&] { return weak_form(ref); }},
      {"byte-identical repeated outputs", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    if (!o.pass) ++failed;
    fmt::print("[{}] criterion {:>2}: {} -- {}\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
