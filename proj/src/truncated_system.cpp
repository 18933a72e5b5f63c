#include "dsdc/truncated_system.hpp"

#include <cmath>

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

struct PlainSum {
  double s = 0.0;
  void add(double x) { s += x; }
  double value() const { return s; }
};

// Neumaier's variant of Kahan summation.
struct CompensatedSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  double value() const { return s + c; }
};

void check_param(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace

State make_initial_state(const InitialData& family, std::size_t n) {
  if (n == 0) throw ValidationError("truncation size n must be at least 1");
  State s;
  s.omega.assign(n, 0.0);
  std::visit(
      overloaded{
          [&](const Monodisperse& f) {
            check_param(std::isfinite(f.a) && f.a >= 0.0, "init.a must be non-negative");
            s.omega[0] = f.a;
          },
          [&](const Geometric& f) {
            check_param(std::isfinite(f.a) && f.a >= 0.0, "init.a must be non-negative");
            check_param(f.r > 0.0 && f.r < 1.0, "init.r must lie in (0, 1)");
            double v = f.a;
            for (std::size_t i = 0; i < n; ++i) {
              v *= f.r;
              s.omega[i] = v;
            }
          },
          [&](const PowerTail& f) {
            check_param(std::isfinite(f.a) && f.a >= 0.0, "init.a must be non-negative");
            check_param(std::isfinite(f.q) && f.q > 1.0, "init.q must exceed 1");
            for (std::size_t i = 1; i <= n; ++i) {
              s.omega[i - 1] = f.a * std::pow(static_cast<double>(i), -f.q);
            }
          },
          [&](const TableInit& f) {
            for (std::size_t i = 0; i < f.values.size(); ++i) {
              check_param(std::isfinite(f.values[i]) && f.values[i] >= 0.0,
                          fmt::format("init table entry {} must be non-negative", i + 1));
              if (i < n) s.omega[i] = f.values[i];
            }
          }},
      family);
  return s;
}

RhsEvaluator::RhsEvaluator(const KernelSpec& spec, std::size_t n, RhsPath path)
    : spec_(spec), n_(n) {
  if (n == 0) throw ValidationError("truncation size n must be at least 1");
  if (const auto m = spec_.max_index(); m && *m < n) {
    throw RangeError(fmt::format("kernel tabulated up to {} but n = {}", *m, n));
  }
  switch (path) {
    case RhsPath::automatic:
      separable_ = spec_.kappa.separable();
      break;
    case RhsPath::general:
      separable_ = false;
      break;
    case RhsPath::separable:
      if (!spec_.kappa.separable()) {
        throw UnsupportedKernelError("separable right-hand side requires zero or scaled_product kappa");
      }
      separable_ = true;
      break;
  }
  theta_ = spec_.theta.values(n);
  if (spec_.kappa.separable()) {
    factor_ = 1.0 + spec_.kappa.separable_factor();
  } else {
    kappa_table_ = &std::get<TableKappa>(spec_.kappa.form());
  }
}

double RhsEvaluator::lambda(std::size_t i, std::size_t j) const {
  const double tt = theta_[i - 1] * theta_[j - 1];
  if (kappa_table_ == nullptr) return factor_ * tt;
  return tt + kappa_table_->values[(i - 1) * kappa_table_->size + (j - 1)];
}

template <class Acc>
void RhsEvaluator::evaluate_general(std::span<const double> omega, RhsSums& sums) const {
  for (std::size_t i = 1; i <= n_; ++i) {
    Acc loss;
    for (std::size_t j = 1; j <= i; ++j) {
      loss.add(static_cast<double>(j) * lambda(i, j) * omega[j - 1]);
    }
    Acc frag;
    for (std::size_t j = i; j <= n_; ++j) {
      frag.add(lambda(i, j) * omega[j - 1]);
    }
    sums.loss[i - 1] = loss.value();
    sums.frag[i - 1] = frag.value();
  }
}

template <class Acc>
void RhsEvaluator::evaluate_separable(std::span<const double> omega, RhsSums& sums) const {
  Acc prefix;
  for (std::size_t i = 1; i <= n_; ++i) {
    prefix.add(static_cast<double>(i) * theta_[i - 1] * omega[i - 1]);
    sums.loss[i - 1] = factor_ * theta_[i - 1] * prefix.value();
  }
  Acc suffix;
  for (std::size_t i = n_; i >= 1; --i) {
    suffix.add(theta_[i - 1] * omega[i - 1]);
    sums.frag[i - 1] = factor_ * theta_[i - 1] * suffix.value();
  }
}

void RhsEvaluator::evaluate(std::span<const double> omega, std::span<double> out,
                            RhsSums& sums) const {
  if (omega.size() != n_ || out.size() != n_) {
    throw ValidationError(fmt::format("state length {} does not match n = {}", omega.size(), n_));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (!std::isfinite(omega[i])) {
      throw NumericInputError(fmt::format("non-finite concentration at index {}", i + 1));
    }
  }
  sums.loss.resize(n_);
  sums.frag.resize(n_);
  const bool compensated = n_ >= kCompensatedThreshold;
  if (separable_) {
    compensated ? evaluate_separable<CompensatedSum>(omega, sums)
                : evaluate_separable<PlainSum>(omega, sums);
  } else {
    compensated ? evaluate_general<CompensatedSum>(omega, sums)
                : evaluate_general<PlainSum>(omega, sums);
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const double production = i == 0 ? 0.0 : omega[i - 1] * sums.loss[i - 1];
    out[i] = production - omega[i] * sums.loss[i] - omega[i] * sums.frag[i];
  }
}

std::vector<double> RhsEvaluator::operator()(std::span<const double> omega) const {
  std::vector<double> out(n_);
  RhsSums sums;
  evaluate(omega, out, sums);
  return out;
}

std::vector<double> rhs_general(const KernelSpec& spec, const State& state) {
  return RhsEvaluator(spec, state.n(), RhsPath::general)(state.omega);
}

std::vector<double> rhs_separable_fast(const KernelSpec& spec, const State& state) {
  return RhsEvaluator(spec, state.n(), RhsPath::separable)(state.omega);
}

}  // namespace dsdc
