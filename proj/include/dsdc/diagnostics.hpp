#pragma once

// Moments, weak-form functionals and the inequality checkers evaluated on a
// trajectory of the truncated system.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dsdc/integrator.hpp"

namespace dsdc {

enum class BoundId {
  EST1,         ///< M1 non-increasing
  EST2,         ///< M0(t2) + 1/2 int (sum theta w)^2 <= M0(t1)
  EST3,         ///< tail theta-square integral against the eta-moment
  TAILEST,      ///< tail coagulation integral against (2/r) M1
  MASSRBND,     ///< M1(t) <= (2/B) M0(0)^{1/2} t^{-1/2}
  GEL_M1INT,    ///< int M1^2 <= D M1(0)
  GEL_PRODUCT,  ///< M1(t) <= (2 M1(0) / (zeta t))^{1/2}
  GEL_INFMASS,  ///< MASSRBND read as the infinite-initial-mass statement
  APPENDIX_M0,  ///< M0 non-increasing and int M0^2 <= (2/C) M0(0)
  AMC,          ///< M1(t) <= M1(0) at every sample
  FM,           ///< M1(t) finite for t > 0
};

std::string to_string(BoundId id);
BoundId bound_id_from_string(const std::string& s);
const std::vector<BoundId>& all_bound_ids();

/// One inequality instantiated on a trajectory; pass <=> lhs <= rhs + tolerance_used.
/// Inapplicable reports (constant not certified) carry NaN sides and pass = false.
struct BoundReport {
  BoundId bound_id = BoundId::EST1;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
  bool applicable = true;
  std::map<std::string, double> params;
  double tolerance_used = 0.0;
  std::string note;
};

struct ConstantOne {};
struct Identity {};
/// min(i, r)
struct Capped {
  std::size_t r = 1;
};
/// i^eta
struct PowerSequence {
  double eta = 0.5;
};
struct CustomSequence {
  std::vector<double> values;  ///< psi_1..psi_N
};

using TestSequence = std::variant<ConstantOne, Identity, Capped, PowerSequence, CustomSequence>;

/// psi_1..psi_n; throws ValidationError for short or negative custom tables.
std::vector<double> test_sequence_values(const TestSequence& psi, std::size_t n);

/// sum_i i^m w_i
double moment(const State& state, double m);

/// LHS - RHS of the summed identity
///   sum psi_i w_i |_{t1}^{t2} = int [ sum_{i<n} (psi_{i+1} - psi_i) w_i S_i
///                                     - psi_n w_n S_n - sum_i psi_i w_i F_i ] ds
/// with the integral taken by the trapezoid rule on the sample grid.
double weak_form_residual(const Trajectory& traj, const TestSequence& psi, double t1, double t2);

/// Bound-check tolerance: 1e-7 * scale + 10 * (rel_tol * scale + abs_tol).
double check_tolerance(const Trajectory& traj, double scale);

BoundReport check_est1(const Trajectory& traj, double t1, double t2);
BoundReport check_est2(const Trajectory& traj, double t1, double t2);
BoundReport check_est3(const Trajectory& traj, std::size_t r, double eta, double t1, double t2);
BoundReport check_tailest(const Trajectory& traj, std::size_t r, double t1, double t2);

/// B is probed from the trajectory's kernel over [1, max(n, 8)], capped at the
/// extent of a tabulated kernel (fewer than 8 indices: inapplicable). The check is
/// inapplicable unless B > 0 and theta_i / i shows no sublinear trend.
BoundReport check_massrbnd(const Trajectory& traj, double t);
BoundReport check_gel_infmass(const Trajectory& traj, double t);

BoundReport check_gel_product(const Trajectory& traj, double zeta, double t);
BoundReport check_m1_square_integral(const Trajectory& traj, double C, double kappa0);
BoundReport check_appendix_m0(const Trajectory& traj, double C);
BoundReport check_amc(const Trajectory& traj);
BoundReport check_fm(const Trajectory& traj);

/// Report for a check whose constant could not be certified.
BoundReport inapplicable(BoundId id, std::string why);

/// First time M1 drops below (1 - delta) M1(0), linearly interpolated between
/// bracketing samples; nullopt if never (or if M1(0) = 0).
std::optional<double> estimate_gelation_time(const Trajectory& traj, double delta);

/// Riemann zeta(s) for s > 1 by Euler-Maclaurin summation.
double series_zeta(double s);

/// D = 2 j^2 / C with j = sum_i i^{-(kappa0 + 1)/2}.
double m1_square_constant(double C, double kappa0);

}  // namespace dsdc
