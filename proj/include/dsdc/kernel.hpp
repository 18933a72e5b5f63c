#pragma once

// Coagulation kernels of the form Lambda_ij = theta_i * theta_j + kappa_ij.
//
// Indices are 1-based throughout the public API, matching the cluster size
// they label (index i is the i-mer).

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dsdc {

/// theta_i = a * i^p
struct PowerTheta {
  double a = 1.0;
  double p = 1.0;

  bool operator==(const PowerTheta&) const = default;
};

/// Explicit theta_1..theta_N.
struct TableTheta {
  std::vector<double> values;

  bool operator==(const TableTheta&) const = default;
};

class ThetaSequence {
 public:
  ThetaSequence() = default;
  ThetaSequence(PowerTheta form);  // NOLINT(google-explicit-constructor)
  ThetaSequence(TableTheta form);  // NOLINT(google-explicit-constructor)

  static ThetaSequence power(double a, double p) { return ThetaSequence(PowerTheta{a, p}); }
  static ThetaSequence table(std::vector<double> values) {
    return ThetaSequence(TableTheta{std::move(values)});
  }

  double operator()(std::size_t i) const;

  /// Largest valid index, or nullopt when unbounded.
  std::optional<std::size_t> max_index() const;

  /// theta_1..theta_n in a zero-based vector.
  std::vector<double> values(std::size_t n) const;

  const std::variant<PowerTheta, TableTheta>& form() const { return form_; }

  bool operator==(const ThetaSequence&) const = default;

 private:
  std::variant<PowerTheta, TableTheta> form_{PowerTheta{}};
};

struct ZeroKappa {
  bool operator==(const ZeroKappa&) const = default;
};

/// kappa_ij = c * theta_i * theta_j
struct ScaledProductKappa {
  double c = 0.0;

  bool operator==(const ScaledProductKappa&) const = default;
};

/// Symmetric N x N matrix stored row-major; entry (i, j) is kappa_{i+1, j+1}.
struct TableKappa {
  std::size_t size = 0;
  std::vector<double> values;

  bool operator==(const TableKappa&) const = default;
};

class KappaModel {
 public:
  KappaModel() = default;
  KappaModel(ZeroKappa form);           // NOLINT(google-explicit-constructor)
  KappaModel(ScaledProductKappa form);  // NOLINT(google-explicit-constructor)
  KappaModel(TableKappa form);          // NOLINT(google-explicit-constructor)

  static KappaModel zero() { return KappaModel(ZeroKappa{}); }
  static KappaModel scaled_product(double c) { return KappaModel(ScaledProductKappa{c}); }
  static KappaModel table(std::size_t size, std::vector<double> values) {
    return KappaModel(TableKappa{size, std::move(values)});
  }

  /// kappa_ij given the already evaluated theta_i, theta_j.
  double operator()(std::size_t i, std::size_t j, double theta_i, double theta_j) const;

  std::optional<std::size_t> max_index() const;

  /// Zero or scaled product: Lambda = (1 + c) theta_i theta_j.
  bool separable() const;

  /// The factor c for separable forms (0 for zero).
  double separable_factor() const;

  const std::variant<ZeroKappa, ScaledProductKappa, TableKappa>& form() const { return form_; }

  bool operator==(const KappaModel&) const = default;

 private:
  std::variant<ZeroKappa, ScaledProductKappa, TableKappa> form_{ZeroKappa{}};
};

enum class DeclaredClass { sublinear, at_least_linear, unclassified };

struct KernelSpec {
  ThetaSequence theta;
  KappaModel kappa;
  DeclaredClass declared_class = DeclaredClass::unclassified;

  /// Largest index at which the kernel can be evaluated, nullopt if unbounded.
  std::optional<std::size_t> max_index() const;

  bool operator==(const KernelSpec&) const = default;
};

/// Lambda_ij. Throws RangeError beyond a table's range.
double eval_kernel(const KernelSpec& spec, std::size_t i, std::size_t j);

/// Result of probing a kernel over [1, n_probe]^2.
struct ClassReport {
  double B = 0.0;                  ///< min theta_i / i over the probe
  std::optional<double> A;         ///< exact for scaled_product, fitted for tables
  bool sublinear_trend = false;    ///< theta_i / i strictly decreasing on the last half
  std::optional<double> C;         ///< Lambda >= C (ij)^{kappa0/2}
  std::optional<double> kappa0;
  std::optional<double> zeta;      ///< Lambda >= zeta ij
  std::optional<double> uniform_min;  ///< Lambda >= uniform_min

  // Probe minima kept even when the constant is reported absent because the
  // ratio is still falling at the edge of the probe.
  double C_probe_min = 0.0;
  double zeta_probe_min = 0.0;
  double uniform_probe_min = 0.0;
  bool C_decays = false;
  bool zeta_decays = false;
  bool uniform_decays = false;
};

/// Fills B, A and sublinear_trend. Requires n_probe >= 8.
ClassReport classify_kernel(const KernelSpec& spec, std::size_t n_probe);

/// Fills C, kappa0, zeta and uniform_min (the remaining fields are left default).
ClassReport lower_bound_constants(const KernelSpec& spec, std::size_t n_probe, double kappa0);

/// classify_kernel and lower_bound_constants merged into one report.
ClassReport full_report(const KernelSpec& spec, std::size_t n_probe, double kappa0);

std::string to_string(DeclaredClass c);
DeclaredClass declared_class_from_string(const std::string& s);

}  // namespace dsdc
