#include "dsdc/io.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

namespace dsdc {

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(fmt::format("write to '{}' failed", path));
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string csv_string(const Trajectory& traj, std::size_t head_size) {
  const std::size_t k = std::min(traj.n(), head_size);
  fmt::memory_buffer b;
  auto out = std::back_inserter(b);
  fmt::format_to(out, "t,M0,M1,M2,I_theta_sq,I_M1_sq,I_M0_sq,I_total_coag");
  for (std::size_t i = 1; i <= k; ++i) fmt::format_to(out, ",omega_{}", i);
  fmt::format_to(out, "\n");
  for (const auto& s : traj.samples) {
    fmt::format_to(out, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", s.t(),
                   moment(s.state, 0.0), moment(s.state, 1.0), moment(s.state, 2.0), s.acc.theta_sq,
                   s.acc.m1_sq, s.acc.m0_sq, s.acc.total_coag);
    for (std::size_t i = 0; i < k; ++i) fmt::format_to(out, ",{:.17g}", s.state.omega[i]);
    fmt::format_to(out, "\n");
  }
  return fmt::to_string(b);
}

void emit_csv(const Trajectory& traj, const std::string& path, std::size_t head_size) {
  write_file(path, csv_string(traj, head_size));
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  nlohmann::json j = {{"bound_id", to_string(r.bound_id)},
                      {"lhs", r.lhs},
                      {"rhs", r.rhs},
                      {"margin", r.margin},
                      {"pass", r.pass},
                      {"params", params},
                      {"tolerance_used", r.tolerance_used},
                      {"applicable", r.applicable}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t k = 0; k < r.n_list.size(); ++k) {
    nlohmann::json run = {{"n", r.n_list[k]},
                          {"initial_mass", r.initial_mass[k]},
                          {"mass_retention", r.mass_retention[k]},
                          {"mass_loss", r.mass_loss[k]},
                          {"gel_time", optional_json(r.gel_times[k])},
                          {"oracle_error", optional_json(r.oracle_errors[k])}};
    if (!r.failures[k].empty()) run["failure"] = r.failures[k];
    runs.push_back(run);
  }
  return {{"version", kVersion},
          {"classification", to_string(r.classification)},
          {"T", r.options.T},
          {"delta", r.options.delta},
          {"thresholds",
           {{"gel_time_stabilization", r.options.gel_time_stabilization},
            {"loss_ratio", r.options.loss_ratio},
            {"loss_floor", r.options.loss_floor}}},
          {"runs", runs}};
}

void write_json(const nlohmann::json& doc, const std::string& path) {
  write_file(path, doc.dump(2) + "\n");
}

}  // namespace dsdc
