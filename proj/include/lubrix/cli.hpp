#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "lubrix/config.hpp"
#include "lubrix/inequalities.hpp"
#include "lubrix/io.hpp"
#include "lubrix/reynolds.hpp"
#include "lubrix/reynolds_fv.hpp"
#include "lubrix/thinfilm.hpp"

namespace lubrix::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_solver_failure = 2,
  exit_validation_failure = 3,
};

// Everything the command line can override on top of the config file.
struct Invocation {
  std::string command;       // e.g. "reynolds solve"
  std::string config_path;   // empty: built-in defaults
  std::string out_dir;       // empty: keep the config's output.dir
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;  // check commands only
  int threads = 0;  // 0: leave the linear algebra backend alone
};

// LUBRIX_LOG: quiet < info (default) < debug.
inline int log_level() {
  static const int lvl = [] {
    const char* e = std::getenv("LUBRIX_LOG");
    if (!e) return 1;
    const std::string s(e);
    if (s == "quiet" || s == "error") return 0;
    if (s == "debug") return 2;
    return 1;
  }();
  return lvl;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::fprintf(stderr, "[lubrix] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::fprintf(stderr, "[lubrix] %s\n", msg.c_str());
}

// Failures print one machine-readable JSON object to stderr.
inline void emit_error(const char* kind, const std::string& message,
                       const std::vector<std::string>& details = {}) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  if (!details.empty()) j["details"] = details;
  std::fprintf(stderr, "%s\n", j.dump().c_str());
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void write_report(const RunConfig& cfg, const std::filesystem::path& name,
                         SolverReport report) {
  const std::filesystem::path path = std::filesystem::path(cfg.out_dir) / name;
  write_json_file(path, to_json(report));
  log_info("wrote " + path.string());
}

}  // namespace detail

inline int run_reynolds_solve(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const ReynoldsProblem prob = cfg.reynolds_problem();
  ReynoldsSolution sol;
  try {
    sol = solve_reynolds(prob, cfg.reynolds_options());
  } catch (const std::exception& e) {
    emit_error("solver", e.what());
    return exit_solver_failure;
  }
  const ReynoldsResiduals res = reynolds_residuals(prob, sol);

  write_text_file(std::filesystem::path(cfg.out_dir) / "reynolds.csv", reynolds_csv(prob, sol));
  log_info("wrote " + (std::filesystem::path(cfg.out_dir) / "reynolds.csv").string());

  SolverReport rep;
  rep.command = "reynolds solve";
  rep.config_hash = config_hash(cfg);
  rep.wall_time_s = detail::seconds_since(t0);
  rep.metrics = {{"solver", "shooting"},
                 {"lambda_flux", sol.lambda},
                 {"mass", sol.mass},
                 {"rho0", sol.rho0},
                 {"n", cfg.reynolds_n},
                 {"outer_iterations", sol.outer_iterations},
                 {"integrations", sol.integrations},
                 {"residuals",
                  {{"first_integral_rel", res.first_integral_rel}, {"mass_rel", res.mass_rel}}}};
  detail::write_report(cfg, "reynolds.json", std::move(rep));
  return exit_ok;
}

// Cross-validation of the shooting solver against the finite-volume Newton
// discretization of the same flux balance: sup distance at reynolds.n plus the
// finite-volume self-convergence order over n/4 -> n/2 -> n.
inline int run_reynolds_oracle_compare(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const ReynoldsProblem prob = cfg.reynolds_problem();
  const int n = cfg.reynolds_n;
  try {
    const ReynoldsSolution sh = solve_reynolds(prob, cfg.reynolds_options());
    const FvResult fine = fv_solve(prob, n);
    const FvResult mid = fv_solve(prob, n / 2);
    const FvResult coarse = fv_solve(prob, n / 4);
    if (!fine.converged || !mid.converged || !coarse.converged)
      throw std::runtime_error("finite-volume oracle did not converge");

    double sup = 0.0;
    for (int i = 0; i < n; ++i) sup = std::max(sup, std::abs(sh.rho[std::size_t(i)] - fine.rho[std::size_t(i)]));

    // self-convergence: compare each level on the coarse centers (every
    // refinement nests two fine cells inside a coarse one; average them)
    auto restrict_pair = [](const std::vector<double>& f) {
      std::vector<double> c(f.size() / 2);
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (f[2 * i] + f[2 * i + 1]);
      return c;
    };
    const std::vector<double> mid_on_coarse = restrict_pair(mid.rho);
    const std::vector<double> fine_on_mid = restrict_pair(fine.rho);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < coarse.rho.size(); ++i)
      d1 = std::max(d1, std::abs(coarse.rho[i] - mid_on_coarse[i]));
    for (std::size_t i = 0; i < mid.rho.size(); ++i)
      d2 = std::max(d2, std::abs(mid.rho[i] - fine_on_mid[i]));
    const double order = std::log2(d1 / d2);

    SolverReport rep;
    rep.command = "reynolds oracle-compare";
    rep.config_hash = config_hash(cfg);
    rep.wall_time_s = detail::seconds_since(t0);
    rep.metrics = {{"n", n},
                   {"lambda_shooting", sh.lambda},
                   {"lambda_fv", fine.lambda},
                   {"sup_distance", sup},
                   {"self_convergence_order", order},
                   {"fv_residual", fine.residual},
                   {"fv_iterations", fine.iterations}};
    detail::write_report(cfg, "oracle_compare.json", std::move(rep));
    return exit_ok;
  } catch (const std::exception& e) {
    emit_error("solver", e.what());
    return exit_solver_failure;
  }
}

inline int run_thinfilm_solve(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const double eps = cfg.eps_list.front();
  try {
    const ThinFilmSolution sol = solve_thinfilm(cfg.thinfilm_problem(eps), cfg.thinfilm_options());
    const std::filesystem::path csv =
        std::filesystem::path(cfg.out_dir) / ("thinfilm_eps" + eps_tag(eps) + ".csv");
    write_text_file(csv, thinfilm_csv(sol.state));
    log_info("wrote " + csv.string());

    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : sol.state.stages)
      stages.push_back({{"delta", s.delta},
                        {"iterations", s.iterations},
                        {"final_update", s.final_update},
                        {"converged", s.converged}});
    SolverReport rep;
    rep.command = "thinfilm solve";
    rep.config_hash = config_hash(cfg);
    rep.wall_time_s = detail::seconds_since(t0);
    rep.metrics = {{"eps", eps},
                   {"nx", cfg.nx},
                   {"nz", cfg.nz},
                   {"delta_final", sol.state.delta},
                   {"outer_iterations", sol.state.outer_iterations},
                   {"max_mass_drift", sol.state.max_mass_drift},
                   {"stages", stages},
                   {"report", to_json(sol.report)}};
    detail::write_report(cfg, "thinfilm.json", std::move(rep));
    return exit_ok;
  } catch (const std::exception& e) {
    emit_error("solver", e.what());
    return exit_solver_failure;
  }
}

// The sweep keeps going past a failed eps: solved rows still land in
// sweep.json (and their CSV files), the failed ones carry their error string,
// and the exit code reports the partial failure.
inline int run_thinfilm_sweep(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepTable table;
  try {
    table = epsilon_sweep(cfg.thinfilm_problem(cfg.eps_list.front()), cfg.eps_list,
                          cfg.thinfilm_options(), cfg.reynolds_options());
  } catch (const std::exception& e) {
    // only the matched Reynolds solve can throw out of the sweep itself
    emit_error("solver", e.what());
    return exit_solver_failure;
  }

  bool all_solved = true;
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& row : table.rows) {
    if (row.solved && row.state) {
      const std::filesystem::path csv =
          std::filesystem::path(cfg.out_dir) / ("thinfilm_eps" + eps_tag(row.eps) + ".csv");
      write_text_file(csv, thinfilm_csv(*row.state));
      log_info("wrote " + csv.string());
    } else {
      all_solved = false;
      log_info("eps " + eps_tag(row.eps) + " failed: " + row.error);
    }
    rows.push_back(to_json(row));
  }

  SolverReport rep;
  rep.command = "thinfilm sweep";
  rep.config_hash = config_hash(cfg);
  rep.wall_time_s = detail::seconds_since(t0);
  rep.metrics = {{"reynolds_lambda", table.reynolds_lambda},
                 {"reynolds_wall_time_s", table.reynolds_wall_time_s},
                 {"rows", rows}};
  detail::write_report(cfg, "sweep.json", std::move(rep));
  if (!all_solved) {
    emit_error("solver", "one or more sweep rows failed; sweep.json retained");
    return exit_solver_failure;
  }
  return exit_ok;
}

inline int run_check_inequalities(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const GapProfile gap = cfg.gap();
    nlohmann::json kinds = nlohmann::json::array();
    bool all_within = true;
    for (InequalityKind kind :
         {InequalityKind::poincare, InequalityKind::korn, InequalityKind::anisotropic}) {
      const InequalitySampleStats st = sample_inequality(kind, gap, cfg.checks_eps, cfg.samples,
                                                         cfg.seed, cfg.mu, cfg.lambda_visc);
      all_within = all_within && st.exceedance_seeds.empty();
      kinds.push_back(to_json(st));
      log_debug(std::string(to_string(kind)) + ": worst ratio " +
                std::to_string(st.worst_ratio) + " over " + std::to_string(st.samples) +
                " samples");
    }
    SolverReport rep;
    rep.command = "check inequalities";
    rep.config_hash = config_hash(cfg);
    rep.wall_time_s = detail::seconds_since(t0);
    rep.metrics = {{"eps", cfg.checks_eps},
                   {"samples", cfg.samples},
                   {"seed", cfg.seed},
                   {"all_within_bound", all_within},
                   {"kinds", kinds}};
    detail::write_report(cfg, "checks.json", std::move(rep));
    return exit_ok;
  } catch (const std::exception& e) {
    emit_error("solver", e.what());
    return exit_solver_failure;
  }
}

// Residuals of the certifying identity G' T = H + p_R + sqrt(delta) rho over
// random densities in [0, rho_bar + 1], for both pressure families.
inline int run_eos_identities(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int n_samples = 1000;
  try {
    const double rho_bar = cfg.law.rho_bar;
    const double rho_M = cfg.mass / cfg.gap_mean;
    nlohmann::json families = nlohmann::json::array();
    double overall = 0.0;
    for (PressureFamily family : {PressureFamily::rational, PressureFamily::log}) {
      PressureLaw law = cfg.law;
      law.family = family;
      // The identity holds for every truncation level and regularization
      // parameter; verify it at moderate values where the nested quadrature
      // certifies its tolerance cheaply.
      RegularizedEOS reg{law, 10.0 / rho_bar, 0.25, rho_M};
      reg.validate();
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> dist(0.0, rho_bar + 1.0);
      double worst = 0.0, worst_rho = 0.0;
      for (int k = 0; k < n_samples; ++k) {
        const double rho = dist(rng);
        const double r = std::abs(reg.identity_residual(rho));
        if (r > worst) {
          worst = r;
          worst_rho = rho;
        }
      }
      overall = std::max(overall, worst);
      families.push_back({{"family", to_string(family)},
                          {"max_residual", worst},
                          {"worst_rho", worst_rho},
                          {"samples", n_samples}});
    }
    SolverReport rep;
    rep.command = "eos identities";
    rep.config_hash = config_hash(cfg);
    rep.wall_time_s = detail::seconds_since(t0);
    rep.metrics = {{"max_residual", overall}, {"families", families}, {"seed", cfg.seed}};
    detail::write_report(cfg, "eos.json", std::move(rep));
    return exit_ok;
  } catch (const std::exception& e) {
    emit_error("solver", e.what());
    return exit_solver_failure;
  }
}

inline int dispatch(const Invocation& inv) {
  RunConfig cfg;
  try {
    if (!inv.config_path.empty()) cfg = load_config(inv.config_path);
  } catch (const ConfigError& e) {
    emit_error("validation", "config rejected", e.problems);
    return exit_validation_failure;
  }
  if (!inv.out_dir.empty()) cfg.out_dir = inv.out_dir;
  if (inv.seed) cfg.seed = *inv.seed;
  if (inv.samples) {
    if (*inv.samples < 1) {
      emit_error("validation", "--samples must be >= 1");
      return exit_validation_failure;
    }
    cfg.samples = *inv.samples;
  }
  if (inv.threads > 0) Eigen::setNbThreads(inv.threads);

  if (inv.command == "reynolds solve") return run_reynolds_solve(cfg);
  if (inv.command == "reynolds oracle-compare") return run_reynolds_oracle_compare(cfg);
  if (inv.command == "thinfilm solve") return run_thinfilm_solve(cfg);
  if (inv.command == "thinfilm sweep") return run_thinfilm_sweep(cfg);
  if (inv.command == "check inequalities") return run_check_inequalities(cfg);
  if (inv.command == "eos identities") return run_eos_identities(cfg);
  emit_error("validation", "unknown command '" + inv.command + "'");
  return exit_validation_failure;
}

}  // namespace lubrix::cli
