#pragma once

// Right-hand side of the n-dimensional truncated Safronov-Dubovskii system
//
//   d w_i/dt = w_{i-1} S_{i-1} - w_i S_i - w_i F_i,
//   S_i = sum_{j=1}^{i} j Lambda_ij w_j,   F_i = sum_{j=i}^{n} Lambda_ij w_j,
//
// with the production term absent for i = 1.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "dsdc/kernel.hpp"

namespace dsdc {

struct State {
  double t = 0.0;
  std::vector<double> omega;  ///< omega[i - 1] is the i-mer concentration

  std::size_t n() const { return omega.size(); }
};

/// w_1 = a, the rest 0.
struct Monodisperse {
  double a = 1.0;

  bool operator==(const Monodisperse&) const = default;
};
/// w_i = a r^i, 0 < r < 1.
struct Geometric {
  double a = 1.0;
  double r = 0.5;

  bool operator==(const Geometric&) const = default;
};
/// w_i = a i^{-q}, q > 1.
struct PowerTail {
  double a = 1.0;
  double q = 2.0;

  bool operator==(const PowerTail&) const = default;
};
/// Explicit values; entries past the table are 0.
struct TableInit {
  std::vector<double> values;

  bool operator==(const TableInit&) const = default;
};

using InitialData = std::variant<Monodisperse, Geometric, PowerTail, TableInit>;

State make_initial_state(const InitialData& family, std::size_t n);

enum class RhsPath { automatic, general, separable };

/// Per-index partial sums produced alongside the right-hand side.
struct RhsSums {
  std::vector<double> loss;   ///< S_i
  std::vector<double> frag;   ///< F_i
};

/// Right-hand side evaluator bound to one kernel and one truncation size.
/// Theta is tabulated once at construction.
class RhsEvaluator {
 public:
  RhsEvaluator(const KernelSpec& spec, std::size_t n, RhsPath path = RhsPath::automatic);

  std::size_t size() const { return n_; }
  bool uses_separable_path() const { return separable_; }

  /// Writes the right-hand side into `out` and the partial sums into `sums`.
  /// Throws NumericInputError on non-finite input.
  void evaluate(std::span<const double> omega, std::span<double> out, RhsSums& sums) const;

  std::vector<double> operator()(std::span<const double> omega) const;

  const std::vector<double>& theta() const { return theta_; }
  double lambda(std::size_t i, std::size_t j) const;

 private:
  template <class Acc>
  void evaluate_general(std::span<const double> omega, RhsSums& sums) const;
  template <class Acc>
  void evaluate_separable(std::span<const double> omega, RhsSums& sums) const;

  KernelSpec spec_;
  std::size_t n_;
  bool separable_;
  double factor_ = 1.0;  ///< 1 + c on the separable path
  std::vector<double> theta_;
  const TableKappa* kappa_table_ = nullptr;
};

/// O(n^2) evaluation straight from the definition.
std::vector<double> rhs_general(const KernelSpec& spec, const State& state);

/// O(n) evaluation via prefix/suffix sums; throws UnsupportedKernelError for table kappa.
std::vector<double> rhs_separable_fast(const KernelSpec& spec, const State& state);

/// Truncation size at and above which partial sums use compensated summation.
inline constexpr std::size_t kCompensatedThreshold = 1024;

}  // namespace dsdc
