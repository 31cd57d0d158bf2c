#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lubrix/config.hpp"
#include "lubrix/inequalities.hpp"
#include "lubrix/reynolds.hpp"
#include "lubrix/thinfilm.hpp"
#include "lubrix/version.hpp"

namespace lubrix {

// One run's machine-readable summary. `metrics` holds the per-module residuals
// and diagnostics of whichever command ran; wall time is kept outside it so
// everything under `metrics` is deterministic for a fixed config.
struct SolverReport {
  std::string command;
  std::string config_hash;
  std::string version = version_string;
  double wall_time_s = 0.0;
  nlohmann::json metrics;

  bool operator==(const SolverReport&) const = default;
};

inline nlohmann::json to_json(const SolverReport& r) {
  return {{"command", r.command},
          {"config_hash", r.config_hash},
          {"version", r.version},
          {"wall_time_s", r.wall_time_s},
          {"metrics", r.metrics}};
}

inline SolverReport report_from_json(const nlohmann::json& j) {
  SolverReport r;
  r.command = j.at("command").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.version = j.at("version").get<std::string>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.metrics = j.at("metrics");
  return r;
}

namespace detail {

// Full round-trip precision with a '.' decimal point (the C locale is never
// changed by this library).
inline std::string csv_num(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

}  // namespace detail

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("short write to '" + path.string() + "'");
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// reynolds.csv: the sampled density with the reconstructed pressure gradient,
// volume flux q = -h^3/(12 mu) dp/dy + s h / 2, and the carried flux rho q
// (constant -lambda up to solver error).
inline std::string reynolds_csv(const ReynoldsProblem& prob, const ReynoldsSolution& sol) {
  std::string out = "y,rho,p,dpdy,q,rho_q\n";
  for (std::size_t i = 0; i < sol.y.size(); ++i) {
    const double y = sol.y[i], rho = sol.rho[i];
    const double p = prob.law.p(rho);
    const double dpdy = reynolds_dpdy(prob, sol.lambda, y, rho);
    const double q = reynolds_flux(prob, sol.lambda, y, rho);
    out += detail::csv_num(y) + "," + detail::csv_num(rho) + "," + detail::csv_num(p) + "," +
           detail::csv_num(dpdy) + "," + detail::csv_num(q) + "," + detail::csv_num(rho * q) +
           "\n";
  }
  return out;
}

// thinfilm_eps{e}.csv: nodal fields of a converged state, bottom row first.
// y and zeta are the sigma-grid coordinates; the physical height is
// Z = zeta h(y) (and eps Z before rescaling).
inline std::string thinfilm_csv(const ThinFilmState& st) {
  const GridQ& grid = st.grid;
  std::string out = "y,zeta,rho,uh,V,p\n";
  for (int j = 0; j <= grid.nz; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t a = grid.node(i, j);
      out += detail::csv_num(grid.y(i)) + "," + detail::csv_num(grid.zeta(j)) + "," +
             detail::csv_num(st.rho[a]) + "," + detail::csv_num(st.uh[a]) + "," +
             detail::csv_num(st.V[a]) + "," + detail::csv_num(st.p[a]) + "\n";
    }
  return out;
}

inline std::string eps_tag(double eps) {
  char b[32];
  std::snprintf(b, sizeof b, "%g", eps);
  return b;
}

inline nlohmann::json to_json(const EstimateReport& r) {
  return {{"energy_lhs", r.energy_lhs},
          {"energy_rhs", r.energy_rhs},
          {"energy_constant", r.energy_constant},
          {"pressure_mean", r.pressure_mean},
          {"pressure_l2", r.pressure_l2},
          {"vertical_pressure_variation", r.vertical_pressure_variation},
          {"renormalized_residual", r.renormalized_residual},
          {"extension_eta", r.extension_eta},
          {"layer_resolved", r.layer_resolved}};
}

inline nlohmann::json to_json(const SweepRow& row) {
  nlohmann::json j{{"eps", row.eps},
                   {"solved", row.solved},
                   {"delta_final", row.delta_final},
                   {"outer_iterations", row.outer_iterations},
                   {"max_mass_drift", row.max_mass_drift},
                   {"wall_time_s", row.wall_time_s}};
  if (row.solved) {
    j["vertical_pressure_variation"] = row.vertical_pressure_variation;
    j["pressure_distance"] = row.pressure_distance;
    j["shear_distance"] = row.shear_distance;
    j["report"] = to_json(row.report);
  } else {
    j["error"] = row.error;
  }
  return j;
}

inline nlohmann::json to_json(const InequalitySampleStats& st) {
  return {{"kind", to_string(st.kind)},
          {"samples", st.samples},
          {"bound", st.bound},
          {"worst_ratio", st.worst_ratio},
          {"mean_ratio", st.mean_ratio},
          {"worst_seed", st.worst_seed},
          {"exceedance_seeds", st.exceedance_seeds}};
}

}  // namespace lubrix
