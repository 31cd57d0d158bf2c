#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "lubrix/cli.hpp"
#include "lubrix/config.hpp"
#include "lubrix/io.hpp"

namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test run; removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lubrix-test-" + std::to_string(Catch::rngSeed()) + "-" +
            std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool mentions(const lubrix::ConfigError& e, const std::string& needle) {
  for (const auto& p : e.problems)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("an empty config yields the defaults with a stable hash") {
  const lubrix::RunConfig from_empty = lubrix::config_from_string("{}");
  const lubrix::RunConfig defaults;
  CHECK(lubrix::to_json(from_empty) == lubrix::to_json(defaults));
  const std::string h1 = lubrix::config_hash(from_empty);
  const std::string h2 = lubrix::config_hash(lubrix::config_from_string("{}"));
  CHECK(h1 == h2);
  CHECK(h1.size() == 16);
  CHECK(h1.find_first_not_of("0123456789abcdef") == std::string::npos);
}

TEST_CASE("a minimal file overrides only what it names") {
  const auto cfg = lubrix::config_from_string(R"({
    // comments are allowed in config files
    "physics": {"s": 2.0, "mass": 0.5},
    "thinfilm": {"nx": 16, "eps_list": [0.4]},
    "gap": {"kind": "flat"}
  })");
  CHECK(cfg.s == 2.0);
  CHECK(cfg.mass == 0.5);
  CHECK(cfg.nx == 16);
  CHECK(cfg.eps_list == std::vector<double>{0.4});
  CHECK(cfg.gap_cos.empty());  // kind flat clears the default cosine mode
  CHECK(cfg.nz == lubrix::RunConfig{}.nz);
  CHECK(cfg.mu == 1.0);
  CHECK(lubrix::config_hash(cfg) != lubrix::config_hash(lubrix::RunConfig{}));
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    lubrix::config_from_string(R"({"eos": {"famly": "rational"}, "speling": 1})");
    FAIL("expected ConfigError");
  } catch (const lubrix::ConfigError& e) {
    CHECK(mentions(e, "eos.famly"));
    CHECK(mentions(e, "speling"));
  }
}

TEST_CASE("every violation is collected, not just the first") {
  try {
    lubrix::config_from_string(R"({
      "physics": {"mu": -1.0},
      "checks": {"samples": 0},
      "thinfilm": {"eps_list": [0.1, 0.2]}
    })");
    FAIL("expected ConfigError");
  } catch (const lubrix::ConfigError& e) {
    CHECK(e.problems.size() >= 3);
    CHECK(mentions(e, "physics.mu"));
    CHECK(mentions(e, "checks.samples"));
    CHECK(mentions(e, "strictly decreasing"));
  }
}

TEST_CASE("a mass at or above the packing ceiling is rejected") {
  try {
    lubrix::config_from_string(R"({"physics": {"mass": 2.0}})");  // rho_bar = gap mean = 1
    FAIL("expected ConfigError");
  } catch (const lubrix::ConfigError& e) {
    CHECK(mentions(e, "packing density"));
    CHECK(mentions(e, "physics.mass"));
  }
}

TEST_CASE("parse errors carry position information") {
  try {
    lubrix::config_from_string("{\n  \"eos\": {,}\n}");
    FAIL("expected ConfigError");
  } catch (const lubrix::ConfigError& e) {
    CHECK(std::string(e.what()).find("parse error") != std::string::npos);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("solver report json round trip is the identity") {
  lubrix::SolverReport rep;
  rep.command = "thinfilm sweep";
  rep.config_hash = "0123456789abcdef";
  rep.wall_time_s = 1.25;
  rep.metrics = {{"rows", {1, 2, 3}}, {"nested", {{"a", 0.1}}}};
  const nlohmann::json j = lubrix::to_json(rep);
  const lubrix::SolverReport back = lubrix::report_from_json(j);
  CHECK(back == rep);
  CHECK(lubrix::to_json(back).dump() == j.dump());
}

TEST_CASE("reynolds solve command writes matching artifacts") {
  TempDir tmp;
  const fs::path cfg_path = tmp.path / "flat.json";
  std::ofstream(cfg_path) << R"({
    "gap": {"kind": "flat"},
    "physics": {"s": 2.0, "mass": 0.5},
    "reynolds": {"n": 64}
  })";
  lubrix::cli::Invocation inv;
  inv.command = "reynolds solve";
  inv.config_path = cfg_path.string();
  inv.out_dir = (tmp.path / "out").string();
  REQUIRE(lubrix::cli::dispatch(inv) == lubrix::cli::exit_ok);

  const nlohmann::json rep = nlohmann::json::parse(slurp(tmp.path / "out" / "reynolds.json"));
  CHECK(rep.at("command") == "reynolds solve");
  CHECK(rep.at("metrics").at("lambda_flux").get<double>() == Catch::Approx(-0.5).margin(1e-10));

  lubrix::RunConfig cfg = lubrix::load_config(cfg_path.string());
  cfg.out_dir = inv.out_dir;  // the override is part of the effective config
  CHECK(rep.at("config_hash") == lubrix::config_hash(cfg));

  const std::string csv = slurp(tmp.path / "out" / "reynolds.csv");
  CHECK(csv.rfind("y,rho,p,dpdy,q,rho_q\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);  // header + one row per sample
}

TEST_CASE("a failing sweep keeps its partial artifact and reports exit code 2") {
  TempDir tmp;
  lubrix::RunConfig cfg = lubrix::config_from_string(R"({
    "thinfilm": {"nx": 8, "nz": 4, "eps_list": [0.4, 0.2], "max_outer": 2},
    "reynolds": {"n": 16}
  })");
  cfg.out_dir = (tmp.path / "out").string();
  CHECK(lubrix::cli::run_thinfilm_sweep(cfg) == lubrix::cli::exit_solver_failure);

  const nlohmann::json rep = nlohmann::json::parse(slurp(tmp.path / "out" / "sweep.json"));
  const auto& rows = rep.at("metrics").at("rows");
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.at("solved") == false);
    CHECK(!row.at("error").get<std::string>().empty());
  }
}

TEST_CASE("inequality checks are deterministic for a fixed config") {
  TempDir tmp;
  lubrix::RunConfig cfg;
  cfg.samples = 3;
  auto run = [&](const char* sub) {
    lubrix::RunConfig c = cfg;
    c.out_dir = (tmp.path / sub).string();
    REQUIRE(lubrix::cli::run_check_inequalities(c) == lubrix::cli::exit_ok);
    nlohmann::json j = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "checks.json"));
    j.erase("wall_time_s");
    j.erase("config_hash");  // differs: out_dir is part of the config
    return j.dump();
  };
  const std::string first = run("a");
  const std::string second = run("b");
  CHECK(first == second);

  const nlohmann::json j = nlohmann::json::parse(slurp(tmp.path / "a" / "checks.json"));
  CHECK(j.at("metrics").at("all_within_bound") == true);
  REQUIRE(j.at("metrics").at("kinds").size() == 3);
}

TEST_CASE("unknown commands and invalid configs map to exit code 3") {
  lubrix::cli::Invocation inv;
  inv.command = "reynolds minimize";
  CHECK(lubrix::cli::dispatch(inv) == lubrix::cli::exit_validation_failure);

  TempDir tmp;
  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << R"({"physics": {"mu": 0.0}})";
  inv.command = "reynolds solve";
  inv.config_path = bad.string();
  CHECK(lubrix::cli::dispatch(inv) == lubrix::cli::exit_validation_failure);
}
