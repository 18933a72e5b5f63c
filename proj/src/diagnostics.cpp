#include "dsdc/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace dsdc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

BoundReport finish(BoundId id, double lhs, double rhs, double tol) {
  BoundReport r;
  r.bound_id = id;
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.tolerance_used = tol;
  r.pass = lhs <= rhs + tol;
  return r;
}

double m1(const Sample& s) { return moment(s.state, 1.0); }
double m0(const Sample& s) { return moment(s.state, 0.0); }

double positive_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError(fmt::format("t must be positive (got {})", t));
  return t;
}

// Worst upward step of f along consecutive samples.
template <class F>
double max_increase(const Trajectory& traj, F&& f) {
  double worst = 0.0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    worst = std::max(worst, f(traj.samples[k]) - f(traj.samples[k - 1]));
  }
  return worst;
}

BoundReport mass_rate_bound(const Trajectory& traj, double t, BoundId id) {
  positive_time(t);
  std::size_t n_probe = std::max<std::size_t>(traj.n(), 8);
  if (const auto m = traj.spec.max_index()) n_probe = std::min(n_probe, *m);
  if (n_probe < 8) return inapplicable(id, "kernel tabulated on fewer than 8 indices; B cannot be probed");
  const ClassReport cls = classify_kernel(traj.spec, n_probe);
  if (!(cls.B > 0.0) || cls.sublinear_trend || traj.spec.declared_class == DeclaredClass::sublinear) {
    return inapplicable(id, fmt::format("requires theta_i >= B i with B > 0 (probed B = {}, "
                                        "sublinear trend = {})",
                                        cls.B, cls.sublinear_trend));
  }
  const double lhs = m1(traj.at(t));
  const double m0_init = m0(traj.front());
  const double rhs = 2.0 / cls.B * std::sqrt(m0_init) / std::sqrt(t);
  BoundReport r = finish(id, lhs, rhs, check_tolerance(traj, std::max(lhs, rhs)));
  r.params = {{"t", t}, {"B", cls.B}, {"M0_0", m0_init}, {"M1_0", m1(traj.front())}};
  return r;
}

}  // namespace

std::string to_string(BoundId id) {
  switch (id) {
    case BoundId::EST1: return "EST1";
    case BoundId::EST2: return "EST2";
    case BoundId::EST3: return "EST3";
    case BoundId::TAILEST: return "TAILEST";
    case BoundId::MASSRBND: return "MASSRBND";
    case BoundId::GEL_M1INT: return "GEL_M1INT";
    case BoundId::GEL_PRODUCT: return "GEL_PRODUCT";
    case BoundId::GEL_INFMASS: return "GEL_INFMASS";
    case BoundId::APPENDIX_M0: return "APPENDIX_M0";
    case BoundId::AMC: return "AMC";
    case BoundId::FM: return "FM";
  }
  return "EST1";
}

const std::vector<BoundId>& all_bound_ids() {
  static const std::vector<BoundId> ids = {
      BoundId::EST1,        BoundId::EST2,        BoundId::EST3,        BoundId::TAILEST,
      BoundId::MASSRBND,    BoundId::GEL_M1INT,   BoundId::GEL_PRODUCT, BoundId::GEL_INFMASS,
      BoundId::APPENDIX_M0, BoundId::AMC,         BoundId::FM};
  return ids;
}

BoundId bound_id_from_string(const std::string& s) {
  for (BoundId id : all_bound_ids()) {
    if (to_string(id) == s) return id;
  }
  throw ValidationError(fmt::format("unknown bound id '{}'", s));
}

std::vector<double> test_sequence_values(const TestSequence& psi, std::size_t n) {
  std::vector<double> v(n);
  std::visit(overloaded{[&](const ConstantOne&) { std::fill(v.begin(), v.end(), 1.0); },
                        [&](const Identity&) {
                          for (std::size_t i = 1; i <= n; ++i) v[i - 1] = static_cast<double>(i);
                        },
                        [&](const Capped& c) {
                          if (c.r == 0) throw ValidationError("capped test sequence needs r >= 1");
                          for (std::size_t i = 1; i <= n; ++i) {
                            v[i - 1] = static_cast<double>(std::min(i, c.r));
                          }
                        },
                        [&](const PowerSequence& p) {
                          if (!std::isfinite(p.eta) || p.eta < 0.0) {
                            throw ValidationError("power test sequence needs eta >= 0");
                          }
                          for (std::size_t i = 1; i <= n; ++i) {
                            v[i - 1] = std::pow(static_cast<double>(i), p.eta);
                          }
                        },
                        [&](const CustomSequence& c) {
                          if (c.values.size() < n) {
                            throw ValidationError(fmt::format(
                                "custom test sequence has {} entries, need {}", c.values.size(), n));
                          }
                          for (std::size_t i = 0; i < n; ++i) {
                            if (!(c.values[i] >= 0.0)) {
                              throw ValidationError("test sequence entries must be non-negative");
                            }
                            v[i] = c.values[i];
                          }
                        }},
             psi);
  return v;
}

double moment(const State& state, double m) {
  double s = 0.0;
  for (std::size_t i = 1; i <= state.n(); ++i) {
    const double w = state.omega[i - 1];
    s += (m == 0.0 ? 1.0 : m == 1.0 ? static_cast<double>(i) : std::pow(static_cast<double>(i), m)) * w;
  }
  return s;
}

double weak_form_residual(const Trajectory& traj, const TestSequence& psi, double t1, double t2) {
  const auto [a, b] = sample_window(traj, t1, t2);
  const std::size_t n = traj.n();
  const auto w = test_sequence_values(psi, n);
  RhsEvaluator eval(traj.spec, n);
  std::vector<double> f(n);
  RhsSums sums;

  auto integrand = [&](const State& s) {
    eval.evaluate(s.omega, f, sums);
    double g = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) g += (w[i + 1] - w[i]) * s.omega[i] * sums.loss[i];
    g -= w[n - 1] * s.omega[n - 1] * sums.loss[n - 1];
    for (std::size_t i = 0; i < n; ++i) g -= w[i] * s.omega[i] * sums.frag[i];
    return g;
  };
  auto pairing = [&](const State& s) {
    double p = 0.0;
    for (std::size_t i = 0; i < n; ++i) p += w[i] * s.omega[i];
    return p;
  };

  double integral = 0.0;
  double prev = integrand(traj.samples[a].state);
  for (std::size_t k = a + 1; k <= b; ++k) {
    const double cur = integrand(traj.samples[k].state);
    integral += 0.5 * (traj.samples[k].t() - traj.samples[k - 1].t()) * (prev + cur);
    prev = cur;
  }
  return pairing(traj.samples[b].state) - pairing(traj.samples[a].state) - integral;
}

double check_tolerance(const Trajectory& traj, double scale) {
  scale = std::abs(scale);
  return 1e-7 * scale + 10.0 * (traj.config.rel_tol * scale + traj.config.abs_tol);
}

BoundReport inapplicable(BoundId id, std::string why) {
  BoundReport r;
  r.bound_id = id;
  r.lhs = r.rhs = r.margin = kNaN;
  r.pass = false;
  r.applicable = false;
  r.note = std::move(why);
  return r;
}

BoundReport check_est1(const Trajectory& traj, double t1, double t2) {
  if (!(t1 <= t2)) throw ValidationError("need t1 <= t2");
  const double m_t2 = m1(traj.at(t2));
  const double m_t1 = m1(traj.at(t1));
  const double m_0 = m1(traj.front());
  BoundReport r = finish(BoundId::EST1, m_t2, m_t1, check_tolerance(traj, m_0));
  // Second clause: M1(t1) <= M1(0).
  const double margin_b = m_0 - m_t1;
  r.pass = r.pass && m_t1 <= m_0 + r.tolerance_used;
  r.params = {{"t1", t1}, {"t2", t2}, {"M1_0", m_0}, {"margin_vs_initial", margin_b}};
  return r;
}

BoundReport check_est2(const Trajectory& traj, double t1, double t2) {
  if (!(t1 <= t2)) throw ValidationError("need t1 <= t2");
  const Sample& s1 = traj.at(t1);
  const Sample& s2 = traj.at(t2);
  const double lhs = m0(s2) + 0.5 * (s2.acc.theta_sq - s1.acc.theta_sq);
  const double rhs = m0(s1);
  BoundReport r = finish(BoundId::EST2, lhs, rhs, check_tolerance(traj, m0(traj.front())));
  r.params = {{"t1", t1}, {"t2", t2}, {"M0_0", m0(traj.front())}};
  return r;
}

BoundReport check_est3(const Trajectory& traj, std::size_t r, double eta, double t1, double t2) {
  if (!(eta > 0.0 && eta < 1.0)) throw ValidationError(fmt::format("eta must lie in (0, 1) (got {})", eta));
  if (!(t1 <= t2)) throw ValidationError("need t1 <= t2");
  const std::size_t slot = traj.cutoff_slot(r);
  const Sample& s1 = traj.at(t1);
  const Sample& s2 = traj.at(t2);
  const double lhs = s2.acc.tail_theta_sq[slot] - s1.acc.tail_theta_sq[slot];
  const double eta_moment = moment(s1.state, eta);
  const double rhs = 2.0 * eta_moment * std::pow(static_cast<double>(r), -eta);
  BoundReport rep = finish(BoundId::EST3, lhs, rhs, check_tolerance(traj, std::max(lhs, rhs)));
  rep.params = {{"r", static_cast<double>(r)}, {"eta", eta}, {"t1", t1}, {"t2", t2}};
  return rep;
}

BoundReport check_tailest(const Trajectory& traj, std::size_t r, double t1, double t2) {
  if (!(t1 <= t2)) throw ValidationError("need t1 <= t2");
  const std::size_t slot = traj.cutoff_slot(r);
  const Sample& s1 = traj.at(t1);
  const Sample& s2 = traj.at(t2);
  const double lhs = s2.acc.tail_coag[slot] - s1.acc.tail_coag[slot];
  const double rhs = 2.0 / static_cast<double>(r) * m1(s1);
  BoundReport rep = finish(BoundId::TAILEST, lhs, rhs, check_tolerance(traj, std::max(lhs, rhs)));
  rep.params = {{"r", static_cast<double>(r)}, {"t1", t1}, {"t2", t2}};
  return rep;
}

BoundReport check_massrbnd(const Trajectory& traj, double t) {
  return mass_rate_bound(traj, t, BoundId::MASSRBND);
}

BoundReport check_gel_infmass(const Trajectory& traj, double t) {
  return mass_rate_bound(traj, t, BoundId::GEL_INFMASS);
}

BoundReport check_gel_product(const Trajectory& traj, double zeta, double t) {
  if (!(zeta > 0.0)) throw ValidationError("zeta must be positive");
  positive_time(t);
  const double lhs = m1(traj.at(t));
  const double m_0 = m1(traj.front());
  const double rhs = std::sqrt(2.0 * m_0 / (zeta * t));
  BoundReport r = finish(BoundId::GEL_PRODUCT, lhs, rhs, check_tolerance(traj, std::max(lhs, rhs)));
  r.params = {{"zeta", zeta}, {"t", t}, {"M1_0", m_0}};
  return r;
}

BoundReport check_m1_square_integral(const Trajectory& traj, double C, double kappa0) {
  const double D = m1_square_constant(C, kappa0);
  const double lhs = traj.back().acc.m1_sq;
  const double m_0 = m1(traj.front());
  const double rhs = D * m_0;
  BoundReport r = finish(BoundId::GEL_M1INT, lhs, rhs, check_tolerance(traj, std::max(lhs, rhs)));
  r.params = {{"C", C}, {"kappa0", kappa0}, {"D", D}, {"T", traj.back().t()}, {"M1_0", m_0}};
  return r;
}

BoundReport check_appendix_m0(const Trajectory& traj, double C) {
  if (!(C > 0.0) || !std::isfinite(C)) throw ValidationError("C must be positive");
  const double m0_init = m0(traj.front());
  const double increase = max_increase(traj, m0);
  const double lhs = traj.back().acc.m0_sq;
  const double rhs = 2.0 / C * m0_init;
  BoundReport r = finish(BoundId::APPENDIX_M0, lhs, rhs, check_tolerance(traj, std::max(lhs, rhs)));
  const bool monotone = increase <= 1e-9 * m0_init;
  r.pass = r.pass && monotone;
  r.params = {{"C", C}, {"T", traj.back().t()}, {"M0_0", m0_init}, {"max_M0_increase", increase}};
  if (!monotone) r.note = "M0 increased between samples";
  return r;
}

BoundReport check_amc(const Trajectory& traj) {
  double worst = 0.0;
  double t_worst = 0.0;
  for (const auto& s : traj.samples) {
    const double v = m1(s);
    if (v >= worst) {
      worst = v;
      t_worst = s.t();
    }
  }
  const double m_0 = m1(traj.front());
  BoundReport r = finish(BoundId::AMC, worst, m_0, check_tolerance(traj, m_0));
  r.params = {{"t", t_worst}};
  return r;
}

BoundReport check_fm(const Trajectory& traj) {
  double worst = 0.0;
  bool finite = true;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const double v = m1(traj.samples[k]);
    finite = finite && std::isfinite(v);
    worst = std::max(worst, v);
  }
  BoundReport r = finish(BoundId::FM, worst, std::numeric_limits<double>::max(), 0.0);
  r.pass = finite;
  return r;
}

std::optional<double> estimate_gelation_time(const Trajectory& traj, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  const double m_0 = m1(traj.front());
  if (!(m_0 > 0.0)) return std::nullopt;
  const double threshold = (1.0 - delta) * m_0;
  double t_prev = traj.front().t();
  double m_prev = m_0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const double m = m1(traj.samples[k]);
    const double t = traj.samples[k].t();
    if (m < threshold) {
      return t_prev + (t - t_prev) * (m_prev - threshold) / (m_prev - m);
    }
    t_prev = t;
    m_prev = m;
  }
  return std::nullopt;
}

double series_zeta(double s) {
  if (!(s > 1.0) || !std::isfinite(s)) throw ValidationError("zeta series needs s > 1");
  // sum_{k<N} k^{-s} + N^{1-s}/(s-1) + N^{-s}/2 + sum_j B_2j/(2j)! (s)_{2j-1} N^{-s-2j+1}
  constexpr int N = 16;
  constexpr std::array<double, 6> bernoulli = {1.0 / 6, -1.0 / 30, 1.0 / 42,
                                               -1.0 / 30, 5.0 / 66, -691.0 / 2730};
  double sum = 0.0;
  for (int k = 1; k < N; ++k) sum += std::pow(k, -s);
  const double nd = N;
  sum += std::pow(nd, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(nd, -s);
  double rising = s;      // (s)_{2j-1}
  double factorial = 2.0;  // (2j)!
  for (std::size_t j = 1; j <= bernoulli.size(); ++j) {
    const double p = static_cast<double>(2 * j);
    sum += bernoulli[j - 1] / factorial * rising * std::pow(nd, -s - p + 1.0);
    rising *= (s + p - 1.0) * (s + p);
    factorial *= (p + 1.0) * (p + 2.0);
  }
  return sum;
}

double m1_square_constant(double C, double kappa0) {
  if (!(C > 0.0)) throw ValidationError("C must be positive");
  if (!(kappa0 > 1.0 && kappa0 < 2.0)) throw ValidationError("kappa0 must lie in (1, 2)");
  const double j = series_zeta((kappa0 + 1.0) / 2.0);
  return 2.0 * j * j / C;
}

}  // namespace dsdc
