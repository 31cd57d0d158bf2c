#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lubrix/eos.hpp"
#include "lubrix/gap.hpp"
#include "lubrix/reynolds.hpp"
#include "lubrix/thinfilm.hpp"

namespace lubrix {

// Carries every violation found in a config file, not just the first one.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems_)
      : std::runtime_error(join(problems_)), problems(std::move(problems_)) {}
  explicit ConfigError(std::string problem)
      : ConfigError(std::vector<std::string>{std::move(problem)}) {}

  std::vector<std::string> problems;

 private:
  static std::string join(const std::vector<std::string>& ps) {
    std::string out = "invalid config";
    for (const auto& p : ps) out += "\n  - " + p;
    return out;
  }
};

// One file drives every command, so the thin-film sweep and its matched
// Reynolds limit always share (h, mu, s, M). Defaults reproduce the cosine-gap
// benchmark; a minimal file only overrides what it names.
struct RunConfig {
  PressureLaw law;  // eos.*

  double gap_mean = 1.0;  // gap.*
  std::vector<double> gap_cos = {0.5};

  double mu = 1.0;  // physics.*
  double lambda_visc = 1.0;
  double s = 1.0;
  double mass = 0.4;

  int reynolds_n = 1024;  // reynolds.*
  double reynolds_tol_mass = 1e-10;
  double reynolds_ode_tol = 1e-12;

  int nx = 64, nz = 32;  // thinfilm.*
  std::vector<double> eps_list = {0.2, 0.1, 0.05};
  double delta_min = 1e-3;
  double tol_outer = 1e-10;
  int max_outer = 2000;
  double R = 0.0;  // truncation level of the regularized law; <= 0 picks 1000 / rho_bar

  int samples = 50;  // checks.*
  double checks_eps = 0.2;
  std::uint64_t seed = 20240817;

  std::string out_dir = "out";  // output.*

  GapProfile gap() const { return make_gap(gap_mean, gap_cos); }

  ReynoldsProblem reynolds_problem() const { return {gap(), law, mu, s, mass}; }

  ReynoldsOptions reynolds_options() const {
    ReynoldsOptions o;
    o.n_samples = reynolds_n;
    o.tol_mass = reynolds_tol_mass;
    o.ode_abs_tol = o.ode_rel_tol = reynolds_ode_tol;
    return o;
  }

  ThinFilmProblem thinfilm_problem(double eps) const {
    return {gap(), law, mu, lambda_visc, s, mass, eps};
  }

  ThinFilmOptions thinfilm_options() const {
    ThinFilmOptions o;
    o.nx = nx;
    o.nz = nz;
    o.delta_min = delta_min;
    o.tol_outer = tol_outer;
    o.max_outer = max_outer;
    o.R = R;
    return o;
  }
};

namespace detail {

inline std::string key_path(const char* section, const std::string& key) {
  return section && *section ? std::string(section) + "." + key : key;
}

inline void expect_keys(const nlohmann::json& obj, const char* section,
                        std::initializer_list<const char*> known,
                        std::vector<std::string>& problems) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) problems.push_back("unknown key '" + key_path(section, it.key()) + "'");
  }
}

inline void read_double(const nlohmann::json& obj, const char* section, const char* key,
                        double& out, std::vector<std::string>& problems) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    problems.push_back("'" + key_path(section, key) + "' must be a number");
    return;
  }
  out = v.get<double>();
}

inline void read_int(const nlohmann::json& obj, const char* section, const char* key, int& out,
                     std::vector<std::string>& problems) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    problems.push_back("'" + key_path(section, key) + "' must be an integer");
    return;
  }
  out = v.get<int>();
}

inline void read_u64(const nlohmann::json& obj, const char* section, const char* key,
                     std::uint64_t& out, std::vector<std::string>& problems) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0)) {
    problems.push_back("'" + key_path(section, key) + "' must be a non-negative integer");
    return;
  }
  out = v.get<std::uint64_t>();
}

inline void read_string(const nlohmann::json& obj, const char* section, const char* key,
                        std::string& out, std::vector<std::string>& problems) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    problems.push_back("'" + key_path(section, key) + "' must be a string");
    return;
  }
  out = v.get<std::string>();
}

inline void read_double_list(const nlohmann::json& obj, const char* section, const char* key,
                             std::vector<double>& out, std::vector<std::string>& problems) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_array()) {
    problems.push_back("'" + key_path(section, key) + "' must be an array of numbers");
    return;
  }
  std::vector<double> vals;
  for (const auto& e : v) {
    if (!e.is_number()) {
      problems.push_back("'" + key_path(section, key) + "' must be an array of numbers");
      return;
    }
    vals.push_back(e.get<double>());
  }
  out = std::move(vals);
}

// Fetch a section object; a non-object value is reported and skipped.
inline const nlohmann::json* section(const nlohmann::json& root, const char* name,
                                     std::vector<std::string>& problems) {
  if (!root.contains(name)) return nullptr;
  const auto& v = root.at(name);
  if (!v.is_object()) {
    problems.push_back(std::string("'") + name + "' must be an object");
    return nullptr;
  }
  return &v;
}

}  // namespace detail

// Build a RunConfig from an already-parsed document, collecting every
// structural and semantic violation before throwing.
inline RunConfig config_from_json(const nlohmann::json& root) {
  std::vector<std::string> problems;
  RunConfig cfg;
  if (!root.is_object()) throw ConfigError("config root must be an object");
  detail::expect_keys(root, "",
                      {"eos", "gap", "physics", "reynolds", "thinfilm", "checks", "output"},
                      problems);

  if (const auto* o = detail::section(root, "eos", problems)) {
    detail::expect_keys(*o, "eos", {"family", "rho_bar", "gamma", "a", "theta"}, problems);
    std::string family = to_string(cfg.law.family);
    detail::read_string(*o, "eos", "family", family, problems);
    if (family == "rational")
      cfg.law.family = PressureFamily::rational;
    else if (family == "log")
      cfg.law.family = PressureFamily::log;
    else
      problems.push_back("'eos.family' must be \"rational\" or \"log\"");
    detail::read_double(*o, "eos", "rho_bar", cfg.law.rho_bar, problems);
    detail::read_double(*o, "eos", "gamma", cfg.law.gamma, problems);
    detail::read_double(*o, "eos", "a", cfg.law.a, problems);
    detail::read_double(*o, "eos", "theta", cfg.law.theta, problems);
  }

  if (const auto* o = detail::section(root, "gap", problems)) {
    detail::expect_keys(*o, "gap", {"kind", "mean", "cos_amplitudes"}, problems);
    std::string kind = cfg.gap_cos.empty() ? "flat" : "cosine";
    detail::read_string(*o, "gap", "kind", kind, problems);
    detail::read_double(*o, "gap", "mean", cfg.gap_mean, problems);
    detail::read_double_list(*o, "gap", "cos_amplitudes", cfg.gap_cos, problems);
    if (kind == "flat")
      cfg.gap_cos.clear();
    else if (kind != "cosine")
      problems.push_back("'gap.kind' must be \"flat\" or \"cosine\"");
  }

  if (const auto* o = detail::section(root, "physics", problems)) {
    detail::expect_keys(*o, "physics", {"mu", "lambda_visc", "s", "mass"}, problems);
    detail::read_double(*o, "physics", "mu", cfg.mu, problems);
    detail::read_double(*o, "physics", "lambda_visc", cfg.lambda_visc, problems);
    detail::read_double(*o, "physics", "s", cfg.s, problems);
    detail::read_double(*o, "physics", "mass", cfg.mass, problems);
  }

  if (const auto* o = detail::section(root, "reynolds", problems)) {
    detail::expect_keys(*o, "reynolds", {"n", "tol_mass", "ode_tol"}, problems);
    detail::read_int(*o, "reynolds", "n", cfg.reynolds_n, problems);
    detail::read_double(*o, "reynolds", "tol_mass", cfg.reynolds_tol_mass, problems);
    detail::read_double(*o, "reynolds", "ode_tol", cfg.reynolds_ode_tol, problems);
  }

  if (const auto* o = detail::section(root, "thinfilm", problems)) {
    detail::expect_keys(
        *o, "thinfilm",
        {"nx", "nz", "eps_list", "delta_min", "tol_outer", "max_outer", "R"}, problems);
    detail::read_int(*o, "thinfilm", "nx", cfg.nx, problems);
    detail::read_int(*o, "thinfilm", "nz", cfg.nz, problems);
    detail::read_double_list(*o, "thinfilm", "eps_list", cfg.eps_list, problems);
    detail::read_double(*o, "thinfilm", "delta_min", cfg.delta_min, problems);
    detail::read_double(*o, "thinfilm", "tol_outer", cfg.tol_outer, problems);
    detail::read_int(*o, "thinfilm", "max_outer", cfg.max_outer, problems);
    detail::read_double(*o, "thinfilm", "R", cfg.R, problems);
  }

  if (const auto* o = detail::section(root, "checks", problems)) {
    detail::expect_keys(*o, "checks", {"samples", "eps", "seed"}, problems);
    detail::read_int(*o, "checks", "samples", cfg.samples, problems);
    detail::read_double(*o, "checks", "eps", cfg.checks_eps, problems);
    detail::read_u64(*o, "checks", "seed", cfg.seed, problems);
  }

  if (const auto* o = detail::section(root, "output", problems)) {
    detail::expect_keys(*o, "output", {"dir"}, problems);
    detail::read_string(*o, "output", "dir", cfg.out_dir, problems);
  }

  // Semantic validation; every failed constraint is reported.
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  check(cfg.law.rho_bar > 0, "'eos.rho_bar' must be > 0");
  check(cfg.law.a > 0, "'eos.a' must be > 0");
  check(cfg.law.theta > 0, "'eos.theta' must be > 0");
  if (cfg.law.family == PressureFamily::rational)
    check(cfg.law.gamma >= 1.0, "'eos.gamma' must be >= 1 for the rational family");

  double amp_sum = 0.0;
  for (double a : cfg.gap_cos) amp_sum += std::abs(a);
  const bool gap_positive = cfg.gap_mean - amp_sum > 0.0;
  check(gap_positive,
        "'gap': mean minus the summed |cos_amplitudes| must stay positive, or the film closes");

  check(cfg.mu > 0, "'physics.mu' must be > 0");
  check(cfg.lambda_visc > 0, "'physics.lambda_visc' must be > 0");
  check(std::isfinite(cfg.s), "'physics.s' must be finite");
  check(cfg.mass > 0, "'physics.mass' must be > 0");

  check(cfg.reynolds_n >= 4, "'reynolds.n' must be >= 4");
  check(cfg.reynolds_tol_mass > 0, "'reynolds.tol_mass' must be > 0");
  check(cfg.reynolds_ode_tol > 0, "'reynolds.ode_tol' must be > 0");

  check(cfg.nx >= 4 && cfg.nz >= 4, "'thinfilm.nx' and 'thinfilm.nz' must be >= 4");
  check(!cfg.eps_list.empty(), "'thinfilm.eps_list' must not be empty");
  for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
    if (!(cfg.eps_list[k] > 0)) {
      problems.push_back("'thinfilm.eps_list' entries must be > 0");
      break;
    }
    if (k > 0 && !(cfg.eps_list[k] < cfg.eps_list[k - 1])) {
      problems.push_back("'thinfilm.eps_list' must be strictly decreasing");
      break;
    }
  }
  check(cfg.delta_min > 0 && cfg.delta_min <= 1, "'thinfilm.delta_min' must lie in (0, 1]");
  check(cfg.tol_outer > 0, "'thinfilm.tol_outer' must be > 0");
  check(cfg.max_outer >= 1, "'thinfilm.max_outer' must be >= 1");

  // Cross-module compatibility: the prescribed mass must admit a density
  // below the packing ceiling, and the regularized law must keep its knot
  // above the mean density.
  if (cfg.law.rho_bar > 0 && cfg.mass > 0 && gap_positive) {
    const double volume = cfg.gap_mean;  // cosine modes average to zero
    check(cfg.mass < cfg.law.rho_bar * volume,
          "'physics.mass': the mean density mass / int h must stay below the packing density "
          "rho_bar, otherwise no admissible state exists");
    if (cfg.R > 0) {
      check(cfg.R > 1.0 / cfg.law.rho_bar, "'thinfilm.R' must exceed 1 / rho_bar");
      check(cfg.law.rho_bar - 1.0 / cfg.R > cfg.mass / volume,
            "'thinfilm.R': the truncation knot rho_bar - 1/R must sit above the mean density");
    }
  }

  check(cfg.samples >= 1, "'checks.samples' must be >= 1");
  check(cfg.checks_eps > 0, "'checks.eps' must be > 0");
  check(!cfg.out_dir.empty(), "'output.dir' must not be empty");

  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

inline RunConfig config_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error in '") + path + "': " + e.what());
  }
  return config_from_json(j);
}

// Canonical fully-resolved form: defaults filled in, keys sorted. Two configs
// that resolve to the same settings dump to the same text.
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["eos"] = {{"family", to_string(c.law.family)},
              {"rho_bar", c.law.rho_bar},
              {"gamma", c.law.gamma},
              {"a", c.law.a},
              {"theta", c.law.theta}};
  j["gap"] = {{"kind", c.gap_cos.empty() ? "flat" : "cosine"},
              {"mean", c.gap_mean},
              {"cos_amplitudes", c.gap_cos}};
  j["physics"] = {
      {"mu", c.mu}, {"lambda_visc", c.lambda_visc}, {"s", c.s}, {"mass", c.mass}};
  j["reynolds"] = {
      {"n", c.reynolds_n}, {"tol_mass", c.reynolds_tol_mass}, {"ode_tol", c.reynolds_ode_tol}};
  j["thinfilm"] = {{"nx", c.nx},
                   {"nz", c.nz},
                   {"eps_list", c.eps_list},
                   {"delta_min", c.delta_min},
                   {"tol_outer", c.tol_outer},
                   {"max_outer", c.max_outer},
                   {"R", c.R}};
  j["checks"] = {{"samples", c.samples}, {"eps", c.checks_eps}, {"seed", c.seed}};
  j["output"] = {{"dir", c.out_dir}};
  return j;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Hash of the canonical dump; every artifact embeds it so a mismatch between
// an artifact and the config that claims to have produced it is detectable.
inline std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

}  // namespace lubrix
