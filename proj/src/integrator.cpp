#include "dsdc/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace dsdc {

namespace {

// Fixed slots of the accumulator block appended after the n concentrations.
enum Slot : std::size_t { kThetaSq, kM1Sq, kM0Sq, kTotalCoag, kBoundaryFlux, kFixedSlots };

// Concentrations plus accumulators as one ODE system.
class AugmentedSystem {
 public:
  AugmentedSystem(const KernelSpec& spec, std::size_t n, RhsPath path,
                  const std::vector<std::size_t>& cutoffs)
      : eval_(spec, n, path), n_(n), cutoffs_(cutoffs) {
    diag_.resize(n);
    for (std::size_t i = 1; i <= n; ++i) diag_[i - 1] = eval_.lambda(i, i);
  }

  std::size_t dim() const { return n_ + kFixedSlots + 2 * cutoffs_.size(); }
  std::size_t n() const { return n_; }

  void operator()(std::span<const double> y, std::span<double> dy) {
    const auto omega = y.first(n_);
    eval_.evaluate(omega, dy.first(n_), sums_);
    ++evals_;

    const auto& theta = eval_.theta();
    double* acc = dy.data() + n_;
    const std::size_t nc = cutoffs_.size();
    std::fill(acc, acc + kFixedSlots + 2 * nc, 0.0);

    // One backward sweep gives every tail sum at the registered cutoffs.
    double theta_sum = 0.0, m1 = 0.0, m0 = 0.0, coag = 0.0, diag = 0.0;
    std::size_t slot = nc;
    for (std::size_t i = n_; i >= 1; --i) {
      const double w = omega[i - 1];
      theta_sum += theta[i - 1] * w;
      m1 += static_cast<double>(i) * w;
      m0 += w;
      coag += w * sums_.frag[i - 1];
      diag += diag_[i - 1] * w * w;
      while (slot > 0 && cutoffs_[slot - 1] == i) {
        --slot;
        acc[kFixedSlots + slot] = theta_sum * theta_sum;
        acc[kFixedSlots + nc + slot] = 2.0 * coag - diag;
      }
    }
    acc[kThetaSq] = theta_sum * theta_sum;
    acc[kM1Sq] = m1 * m1;
    acc[kM0Sq] = m0 * m0;
    acc[kTotalCoag] = coag;
    acc[kBoundaryFlux] = static_cast<double>(n_ + 1) * omega[n_ - 1] * sums_.loss[n_ - 1];
    for (std::size_t k = 0; k < dim() - n_; ++k) {
      if (!std::isfinite(acc[k])) throw NumericInputError("non-finite accumulator derivative");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (!std::isfinite(dy[i])) throw NumericInputError("non-finite right-hand side");
    }
  }

  std::size_t evals() const { return evals_; }

 private:
  RhsEvaluator eval_;
  std::size_t n_;
  const std::vector<std::size_t>& cutoffs_;
  std::vector<double> diag_;
  RhsSums sums_;
  std::size_t evals_ = 0;
};

Sample unpack(std::span<const double> y, double t, std::size_t n, std::size_t nc) {
  Sample s;
  s.state.t = t;
  s.state.omega.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
  const double* a = y.data() + n;
  s.acc.theta_sq = a[kThetaSq];
  s.acc.m1_sq = a[kM1Sq];
  s.acc.m0_sq = a[kM0Sq];
  s.acc.total_coag = a[kTotalCoag];
  s.acc.boundary_flux = a[kBoundaryFlux];
  s.acc.tail_theta_sq.assign(a + kFixedSlots, a + kFixedSlots + nc);
  s.acc.tail_coag.assign(a + kFixedSlots + nc, a + kFixedSlots + 2 * nc);
  return s;
}

State state_of(std::span<const double> y, double t, std::size_t n) {
  State s;
  s.t = t;
  s.omega.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
  return s;
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
// b - b_hat
constexpr std::array<double, 7> kE = {71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                                      -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

class Stepper {
 public:
  Stepper(AugmentedSystem& sys, const IntegratorConfig& cfg, double clamp_tol, StepStats& stats)
      : sys_(sys), cfg_(cfg), clamp_tol_(clamp_tol), stats_(stats), dim_(sys.dim()) {
    for (auto& k : k_) k.resize(dim_);
    ytmp_.resize(dim_);
    ynew_.resize(dim_);
  }

  // Outcome of projecting a trial state onto the admissible set.
  enum class Projection { ok, clamped, too_negative };

  Projection project(std::vector<double>& y, std::span<const double> yold) {
    const std::size_t n = sys_.n();
    bool clamped = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] < 0.0) {
        if (y[i] < -clamp_tol_) return Projection::too_negative;
        y[i] = 0.0;
        clamped = true;
      }
    }
    // Integrands are non-negative, so accumulators never decrease.
    for (std::size_t i = n; i < dim_; ++i) y[i] = std::max(y[i], yold[i]);
    return clamped ? Projection::clamped : Projection::ok;
  }

  void advance_adaptive(std::vector<double>& y, double& t, double t_end, double& h) {
    if (!have_k1_) {
      sys_(y, k_[0]);
      have_k1_ = true;
    }
    while (t < t_end) {
      if (stats_.accepted + stats_.rejected >= cfg_.max_steps) {
        throw IntegrationFailure(fmt::format("step budget of {} exhausted at t = {}",
                                             cfg_.max_steps, t),
                                 state_of(y, t, sys_.n()));
      }
      const bool clipped = t + h >= t_end * (1.0 - 1e-14) - 1e-300;
      const double step = clipped ? t_end - t : h;

      for (std::size_t s = 1; s < 7; ++s) {
        for (std::size_t d = 0; d < dim_; ++d) {
          double acc = 0.0;
          for (std::size_t r = 0; r < s; ++r) acc += kA[s][r] * k_[r][d];
          ytmp_[d] = y[d] + step * acc;
        }
        sys_(ytmp_, k_[s]);
      }
      // The 7th stage point is the 5th-order solution (FSAL).
      ynew_ = ytmp_;

      double err = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) {
        double e = 0.0;
        for (std::size_t s = 0; s < 7; ++s) e += kE[s] * k_[s][d];
        e *= step;
        const double scale = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[d]), std::abs(ynew_[d]));
        err = std::max(err, std::abs(e) / scale);
      }
      if (!std::isfinite(err)) throw NumericInputError("non-finite error estimate");

      if (err > 1.0) {
        ++stats_.rejected;
        h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
        check_h(h, y, t);
        continue;
      }

      const Projection p = project(ynew_, y);
      if (p == Projection::too_negative) {
        ++stats_.rejected;
        ++stats_.negativity_rejections;
        h = step * 0.5;
        check_h(h, y, t);
        continue;
      }

      ++stats_.accepted;
      y.swap(ynew_);
      t = clipped ? t_end : t + step;
      if (p == Projection::clamped) {
        ++stats_.clamped;
        sys_(y, k_[0]);
      } else {
        std::swap(k_[0], k_[6]);
      }
      const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      // A clipped step says nothing about the natural step size beyond it.
      const double proposed = std::min(step * grow, cfg_.h_max);
      if (!clipped || proposed > h) h = proposed;
      h = std::min(h, cfg_.h_max);
    }
  }

  void advance_rk4(std::vector<double>& y, double& t, double t_end) {
    const double span = t_end - t;
    const auto m = static_cast<std::size_t>(std::ceil(span / cfg_.h_fixed * (1.0 - 1e-12)));
    const double h = span / static_cast<double>(std::max<std::size_t>(m, 1));
    const double t0 = t;
    for (std::size_t step = 0; step < m; ++step) {
      sys_(y, k_[0]);
      for (std::size_t d = 0; d < dim_; ++d) ytmp_[d] = y[d] + 0.5 * h * k_[0][d];
      sys_(ytmp_, k_[1]);
      for (std::size_t d = 0; d < dim_; ++d) ytmp_[d] = y[d] + 0.5 * h * k_[1][d];
      sys_(ytmp_, k_[2]);
      for (std::size_t d = 0; d < dim_; ++d) ytmp_[d] = y[d] + h * k_[2][d];
      sys_(ytmp_, k_[3]);
      for (std::size_t d = 0; d < dim_; ++d) {
        ynew_[d] = y[d] + h / 6.0 * (k_[0][d] + 2.0 * k_[1][d] + 2.0 * k_[2][d] + k_[3][d]);
      }
      const double t_next = step + 1 == m ? t_end : t0 + static_cast<double>(step + 1) * h;
      const Projection p = project(ynew_, y);
      if (p == Projection::too_negative) {
        throw IntegrationFailure(
            fmt::format("fixed step {} drove a concentration below -clamp_tol at t = {}", h, t_next),
            state_of(y, t, sys_.n()));
      }
      if (p == Projection::clamped) ++stats_.clamped;
      ++stats_.accepted;
      y.swap(ynew_);
      t = t_next;
    }
  }

 private:
  void check_h(double h, std::span<const double> y, double t) const {
    if (h < cfg_.h_min) {
      throw IntegrationFailure(
          fmt::format("step size {:.3e} fell below h_min = {:.3e} at t = {:.17g}", h, cfg_.h_min, t),
          state_of(y, t, sys_.n()));
    }
  }

  AugmentedSystem& sys_;
  const IntegratorConfig& cfg_;
  double clamp_tol_;
  StepStats& stats_;
  std::size_t dim_;
  std::array<std::vector<double>, 7> k_;
  std::vector<double> ytmp_, ynew_;
  bool have_k1_ = false;
};

}  // namespace

std::string to_string(Method m) {
  return m == Method::fixed_rk4 ? "fixed_rk4" : "adaptive_embedded_45";
}

Method method_from_string(const std::string& s) {
  if (s == "adaptive_embedded_45") return Method::adaptive_embedded_45;
  if (s == "fixed_rk4") return Method::fixed_rk4;
  throw ValidationError(fmt::format("unknown integrator method '{}'", s));
}

void IntegratorConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw ValidationError(fmt::format("{} must be positive (got {})", name, v));
    }
  };
  positive(rel_tol, "integrator.rel_tol");
  positive(abs_tol, "integrator.abs_tol");
  positive(h_init, "integrator.h_init");
  positive(h_min, "integrator.h_min");
  positive(h_max, "integrator.h_max");
  positive(h_fixed, "integrator.h");
  if (clamp_tol) positive(*clamp_tol, "integrator.clamp_tol");
  if (!(h_min <= h_init && h_init <= h_max)) {
    throw ValidationError(
        fmt::format("need h_min <= h_init <= h_max (got {}, {}, {})", h_min, h_init, h_max));
  }
}

std::size_t Trajectory::index_of(double t) const {
  const double T = samples.empty() ? 0.0 : samples.back().t();
  const double tol = 1e-12 * std::max(1.0, T);
  auto it = std::lower_bound(samples.begin(), samples.end(), t - tol,
                             [](const Sample& s, double v) { return s.t() < v; });
  if (it == samples.end() || std::abs(it->t() - t) > tol) {
    throw ValidationError(fmt::format("t = {} is not a sample time of the trajectory", t));
  }
  return static_cast<std::size_t>(it - samples.begin());
}

std::size_t Trajectory::cutoff_slot(std::size_t r) const {
  auto it = std::find(tail_cutoffs.begin(), tail_cutoffs.end(), r);
  if (it == tail_cutoffs.end()) {
    throw ValidationError(fmt::format("tail cutoff r = {} was not registered before integration", r));
  }
  return static_cast<std::size_t>(it - tail_cutoffs.begin());
}

std::vector<double> uniform_grid(double T, std::size_t intervals) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("T must be positive");
  if (intervals == 0) throw ValidationError("grid needs at least one interval");
  std::vector<double> g(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    g[k] = T * static_cast<double>(k) / static_cast<double>(intervals);
  }
  g.back() = T;
  return g;
}

Trajectory integrate(const KernelSpec& spec, const State& init, double T, std::vector<double> grid,
                     const IntegratorConfig& cfg, std::vector<std::size_t> tail_cutoffs) {
  cfg.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError(fmt::format("T must be positive (got {})", T));
  const std::size_t n = init.n();
  if (n == 0) throw ValidationError("empty initial state");
  double max_init = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = init.omega[i];
    if (!std::isfinite(w)) throw NumericInputError(fmt::format("non-finite initial value at {}", i + 1));
    if (w < 0.0) throw ValidationError(fmt::format("negative initial value at index {}", i + 1));
    max_init = std::max(max_init, w);
  }
  if (grid.empty() || grid.front() != 0.0) throw ValidationError("sample grid must start at t = 0");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw ValidationError("sample grid must be strictly increasing");
  }
  if (grid.back() > T * (1.0 + 1e-14)) throw ValidationError("sample grid extends beyond T");
  if (grid.back() < T * (1.0 - 1e-14)) {
    grid.push_back(T);
  } else {
    grid.back() = T;
  }
  std::sort(tail_cutoffs.begin(), tail_cutoffs.end());
  tail_cutoffs.erase(std::unique(tail_cutoffs.begin(), tail_cutoffs.end()), tail_cutoffs.end());
  for (std::size_t r : tail_cutoffs) {
    if (r == 0 || r > n) throw ValidationError(fmt::format("tail cutoff r = {} outside [1, {}]", r, n));
  }

  Trajectory traj;
  traj.spec = spec;
  traj.config = cfg;
  traj.tail_cutoffs = tail_cutoffs;
  traj.clamp_tol = cfg.clamp_tol ? *cfg.clamp_tol : (max_init > 0.0 ? 1e-12 * max_init : 1e-12);

  AugmentedSystem sys(spec, n, cfg.rhs_path, traj.tail_cutoffs);
  std::vector<double> y(sys.dim(), 0.0);
  std::copy(init.omega.begin(), init.omega.end(), y.begin());
  const std::size_t nc = traj.tail_cutoffs.size();

  traj.samples.reserve(grid.size());
  traj.samples.push_back(unpack(y, 0.0, n, nc));

  Stepper stepper(sys, cfg, traj.clamp_tol, traj.stats);
  double t = 0.0;
  double h = cfg.h_init;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (cfg.method == Method::adaptive_embedded_45) {
      stepper.advance_adaptive(y, t, grid[k], h);
    } else {
      stepper.advance_rk4(y, t, grid[k]);
    }
    t = grid[k];
    traj.samples.push_back(unpack(y, t, n, nc));
  }
  traj.stats.rhs_evals = sys.evals();
  return traj;
}

std::pair<std::size_t, std::size_t> sample_window(const Trajectory& traj, double t1, double t2) {
  if (!(t1 < t2)) throw ValidationError("need t1 < t2");
  const std::size_t a = traj.index_of(t1);
  const std::size_t b = traj.index_of(t2);
  if (b - a + 1 < 4) {
    throw InsufficientResolutionError(
        fmt::format("only {} samples in [{}, {}]; at least 4 required", b - a + 1, t1, t2));
  }
  return {a, b};
}

double solution_residual(const Trajectory& traj, std::size_t i, double t1, double t2) {
  const std::size_t n = traj.n();
  if (i == 0 || i > n) throw ValidationError(fmt::format("index {} outside [1, {}]", i, n));
  const auto [a, b] = sample_window(traj, t1, t2);
  RhsEvaluator eval(traj.spec, n);
  std::vector<double> f(n);
  RhsSums sums;
  double integral = 0.0;
  double prev = 0.0;
  for (std::size_t k = a; k <= b; ++k) {
    eval.evaluate(traj.samples[k].state.omega, f, sums);
    if (k > a) integral += 0.5 * (traj.samples[k].t() - traj.samples[k - 1].t()) * (prev + f[i - 1]);
    prev = f[i - 1];
  }
  return traj.samples[b].state.omega[i - 1] - traj.samples[a].state.omega[i - 1] - integral;
}

}  // namespace dsdc
