#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsdc/convergence.hpp"
#include "dsdc/diagnostics.hpp"
#include "dsdc/integrator.hpp"

namespace dsdc {

inline constexpr const char* kVersion = "0.1.0";

/// Moment series: t,M0,M1,M2,I_theta_sq,I_M1_sq,I_M0_sq,I_total_coag,omega_1..omega_k
/// with k = min(n, head_size); 17 significant digits, LF line endings.
std::string csv_string(const Trajectory& traj, std::size_t head_size = 8);
void emit_csv(const Trajectory& traj, const std::string& path, std::size_t head_size = 8);

/// {bound_id, lhs, rhs, margin, pass, params, tolerance_used} plus applicable/note.
nlohmann::json to_json(const BoundReport& r);
nlohmann::json to_json(const ConvergenceReport& r);

/// Writes `doc.dump(2)` followed by a newline.
void write_json(const nlohmann::json& doc, const std::string& path);

}  // namespace dsdc
