#include "dsdc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "dsdc/errors.hpp"

namespace dsdc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw ValidationError(fmt::format("{} must be finite and non-negative (got {})", what, v));
  }
}

// Infimum of f(i, j) over [1, n]^2 together with a flag telling whether the
// minimum is still falling at the edge of the probe, i.e. min over the full
// probe is strictly below min over [1, n/2]^2.
template <class F>
std::pair<double, bool> probe_infimum(std::size_t n, F&& f) {
  const std::size_t half = n / 2;
  double inner = std::numeric_limits<double>::infinity();
  double outer = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i; j <= n; ++j) {
      const double v = f(i, j);
      if (j <= half) {
        inner = std::min(inner, v);
      } else {
        outer = std::min(outer, v);
      }
    }
  }
  const double all = std::min(inner, outer);
  const bool decays = outer < inner * (1.0 - 1e-12);
  return {all, decays};
}

}  // namespace

ThetaSequence::ThetaSequence(PowerTheta form) : form_(form) {
  if (!std::isfinite(form.a) || form.a <= 0.0) {
    throw ValidationError(fmt::format("theta.a must be positive (got {})", form.a));
  }
  require_finite_nonneg(form.p, "theta.p");
}

ThetaSequence::ThetaSequence(TableTheta form) : form_(std::move(form)) {
  const auto& v = std::get<TableTheta>(form_).values;
  if (v.empty()) throw ValidationError("theta table is empty");
  for (double x : v) require_finite_nonneg(x, "theta table entry");
}

double ThetaSequence::operator()(std::size_t i) const {
  if (i == 0) throw RangeError("theta index is 1-based");
  return std::visit(overloaded{
                        [&](const PowerTheta& f) {
                          return f.p == 0.0 ? f.a : f.a * std::pow(static_cast<double>(i), f.p);
                        },
                        [&](const TableTheta& f) {
                          if (i > f.values.size()) {
                            throw RangeError(fmt::format("theta index {} beyond table size {}", i,
                                                         f.values.size()));
                          }
                          return f.values[i - 1];
                        }},
                    form_);
}

std::optional<std::size_t> ThetaSequence::max_index() const {
  if (const auto* t = std::get_if<TableTheta>(&form_)) return t->values.size();
  return std::nullopt;
}

std::vector<double> ThetaSequence::values(std::size_t n) const {
  std::vector<double> out(n);
  for (std::size_t i = 1; i <= n; ++i) out[i - 1] = (*this)(i);
  return out;
}

KappaModel::KappaModel(ZeroKappa form) : form_(form) {}

KappaModel::KappaModel(ScaledProductKappa form) : form_(form) {
  require_finite_nonneg(form.c, "kappa.c");
}

KappaModel::KappaModel(TableKappa form) : form_(std::move(form)) {
  const auto& t = std::get<TableKappa>(form_);
  if (t.size == 0 || t.values.size() != t.size * t.size) {
    throw ValidationError(fmt::format("kappa table must hold size^2 = {} entries (got {})",
                                      t.size * t.size, t.values.size()));
  }
  for (std::size_t i = 0; i < t.size; ++i) {
    for (std::size_t j = 0; j < t.size; ++j) {
      const double v = t.values[i * t.size + j];
      require_finite_nonneg(v, "kappa table entry");
      if (v != t.values[j * t.size + i]) {
        throw ValidationError(fmt::format("kappa table not symmetric at ({}, {})", i + 1, j + 1));
      }
    }
  }
}

double KappaModel::operator()(std::size_t i, std::size_t j, double theta_i, double theta_j) const {
  return std::visit(overloaded{[](const ZeroKappa&) { return 0.0; },
                               [&](const ScaledProductKappa& f) { return f.c * (theta_i * theta_j); },
                               [&](const TableKappa& f) {
                                 if (i == 0 || j == 0 || i > f.size || j > f.size) {
                                   throw RangeError(fmt::format(
                                       "kappa index ({}, {}) beyond table size {}", i, j, f.size));
                                 }
                                 return f.values[(i - 1) * f.size + (j - 1)];
                               }},
                    form_);
}

std::optional<std::size_t> KappaModel::max_index() const {
  if (const auto* t = std::get_if<TableKappa>(&form_)) return t->size;
  return std::nullopt;
}

bool KappaModel::separable() const { return !std::holds_alternative<TableKappa>(form_); }

double KappaModel::separable_factor() const {
  if (const auto* s = std::get_if<ScaledProductKappa>(&form_)) return s->c;
  if (std::holds_alternative<ZeroKappa>(form_)) return 0.0;
  throw UnsupportedKernelError("tabulated kappa is not separable");
}

std::optional<std::size_t> KernelSpec::max_index() const {
  const auto a = theta.max_index();
  const auto b = kappa.max_index();
  if (a && b) return std::min(*a, *b);
  return a ? a : b;
}

double eval_kernel(const KernelSpec& spec, std::size_t i, std::size_t j) {
  const double ti = spec.theta(i);
  const double tj = spec.theta(j);
  return ti * tj + spec.kappa(i, j, ti, tj);
}

ClassReport classify_kernel(const KernelSpec& spec, std::size_t n_probe) {
  if (n_probe < 8) throw ValidationError("n_probe must be at least 8");
  const auto theta = spec.theta.values(n_probe);

  ClassReport report;
  report.B = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= n_probe; ++i) {
    report.B = std::min(report.B, theta[i - 1] / static_cast<double>(i));
  }

  bool decreasing = true;
  for (std::size_t i = n_probe / 2; i < n_probe; ++i) {
    const double cur = theta[i - 1] / static_cast<double>(i);
    const double next = theta[i] / static_cast<double>(i + 1);
    if (!(next < cur)) {
      decreasing = false;
      break;
    }
  }
  report.sublinear_trend = decreasing;

  std::visit(overloaded{[&](const ZeroKappa&) { report.A = 0.0; },
                        [&](const ScaledProductKappa& f) { report.A = f.c; },
                        [&](const TableKappa&) {
                          double a = 0.0;
                          for (std::size_t i = 1; i <= n_probe; ++i) {
                            for (std::size_t j = i; j <= n_probe; ++j) {
                              const double tt = theta[i - 1] * theta[j - 1];
                              const double k = spec.kappa(i, j, theta[i - 1], theta[j - 1]);
                              if (tt == 0.0) {
                                if (k > 0.0) {
                                  throw ClassificationError(fmt::format(
                                      "theta vanishes at ({}, {}) while kappa = {}; A undefined",
                                      i, j, k));
                                }
                                continue;
                              }
                              a = std::max(a, k / tt);
                            }
                          }
                          report.A = a;
                        }},
             spec.kappa.form());
  return report;
}

ClassReport lower_bound_constants(const KernelSpec& spec, std::size_t n_probe, double kappa0) {
  if (n_probe < 8) throw ValidationError("n_probe must be at least 8");
  if (!(kappa0 > 1.0 && kappa0 <= 2.0)) {
    throw ValidationError(fmt::format("kappa0 must lie in (1, 2] (got {})", kappa0));
  }
  const auto theta = spec.theta.values(n_probe);
  auto lambda = [&](std::size_t i, std::size_t j) {
    return theta[i - 1] * theta[j - 1] + spec.kappa(i, j, theta[i - 1], theta[j - 1]);
  };

  ClassReport report;
  report.kappa0 = kappa0;

  auto [c_min, c_decays] = probe_infimum(n_probe, [&](std::size_t i, std::size_t j) {
    return lambda(i, j) / std::pow(static_cast<double>(i * j), kappa0 / 2.0);
  });
  report.C_probe_min = c_min;
  report.C_decays = c_decays;
  if (c_min > 0.0 && !c_decays) report.C = c_min;

  auto [z_min, z_decays] = probe_infimum(n_probe, [&](std::size_t i, std::size_t j) {
    return lambda(i, j) / static_cast<double>(i * j);
  });
  report.zeta_probe_min = z_min;
  report.zeta_decays = z_decays;
  if (z_min > 0.0 && !z_decays) report.zeta = z_min;

  auto [u_min, u_decays] = probe_infimum(n_probe, lambda);
  report.uniform_probe_min = u_min;
  report.uniform_decays = u_decays;
  if (u_min > 0.0 && !u_decays) report.uniform_min = u_min;

  return report;
}

ClassReport full_report(const KernelSpec& spec, std::size_t n_probe, double kappa0) {
  ClassReport r = classify_kernel(spec, n_probe);
  const ClassReport lb = lower_bound_constants(spec, n_probe, kappa0);
  r.C = lb.C;
  r.kappa0 = lb.kappa0;
  r.zeta = lb.zeta;
  r.uniform_min = lb.uniform_min;
  r.C_probe_min = lb.C_probe_min;
  r.zeta_probe_min = lb.zeta_probe_min;
  r.uniform_probe_min = lb.uniform_probe_min;
  r.C_decays = lb.C_decays;
  r.zeta_decays = lb.zeta_decays;
  r.uniform_decays = lb.uniform_decays;
  return r;
}

std::string to_string(DeclaredClass c) {
  switch (c) {
    case DeclaredClass::sublinear:
      return "sublinear";
    case DeclaredClass::at_least_linear:
      return "at_least_linear";
    case DeclaredClass::unclassified:
      return "unclassified";
  }
  return "unclassified";
}

DeclaredClass declared_class_from_string(const std::string& s) {
  if (s == "sublinear") return DeclaredClass::sublinear;
  if (s == "at_least_linear") return DeclaredClass::at_least_linear;
  if (s == "unclassified") return DeclaredClass::unclassified;
  throw ValidationError(fmt::format("unknown kernel class '{}'", s));
}

}  // namespace dsdc
