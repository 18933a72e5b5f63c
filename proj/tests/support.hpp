#pragma once

// Shared oracles and generators for the unit suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dsdc/errors.hpp"
#include "dsdc/kernel.hpp"
#include "dsdc/truncated_system.hpp"

namespace dsdc::testing {

inline KernelSpec power_kernel(double p, double c = 0.0, double a = 1.0) {
  return {ThetaSequence::power(a, p), c == 0.0 ? KappaModel::zero() : KappaModel::scaled_product(c)};
}

// Right-hand side summed term by term from its definition, in long double:
//   w_{i-1} sum_{j<i} j L_{i-1,j} w_j - w_i sum_{j<=i} j L_{i,j} w_j - sum_{j>=i} L_{i,j} w_i w_j
inline std::vector<double> rhs_by_definition(const KernelSpec& spec, const std::vector<double>& w) {
  const std::size_t n = w.size();
  auto L = [&](std::size_t i, std::size_t j) { return static_cast<long double>(eval_kernel(spec, i, j)); };
  std::vector<double> out(n);
  for (std::size_t i = 1; i <= n; ++i) {
    long double gain = 0.0L;
    if (i > 1) {
      for (std::size_t j = 1; j <= i - 1; ++j) gain += j * L(i - 1, j) * w[i - 2] * w[j - 1];
    }
    long double loss = 0.0L;
    for (std::size_t j = 1; j <= i; ++j) loss += j * L(i, j) * w[i - 1] * w[j - 1];
    long double frag = 0.0L;
    for (std::size_t j = i; j <= n; ++j) frag += L(i, j) * w[i - 1] * w[j - 1];
    out[i - 1] = static_cast<double>(gain - loss - frag);
  }
  return out;
}

/// Seeded generator of non-negative states with varied support, decay and sparsity.
class StateGen {
 public:
  explicit StateGen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  std::vector<double> omega(std::size_t n) {
    const double decay = uniform(0.0, 3.0);
    const double keep = uniform(0.2, 1.0);
    const double scale = std::pow(10.0, uniform(-3.0, 1.0));
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
      if (uniform(0.0, 1.0) < keep) w[i - 1] = scale * uniform(0.0, 1.0) * std::pow(double(i), -decay);
    }
    return w;
  }

  KernelSpec separable_kernel() {
    const double ps[] = {0.0, 0.5, 0.75, 1.0};
    const double p = ps[index(0, 3)];
    const double c = index(0, 1) == 0 ? 0.0 : uniform(0.0, 2.0);
    return power_kernel(p, c, uniform(0.5, 2.0));
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace dsdc::testing
