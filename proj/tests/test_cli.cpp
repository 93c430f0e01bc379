#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "penning/config.hpp"
#include "penning/csv.hpp"
#include "penning/errors.hpp"
#include "penning/run.hpp"

using namespace penning;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("penning_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the installed binary; returns its exit status.
int run_binary(const json& config, const fs::path& dir, const std::string& extra = "") {
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << config.dump(2);
  const std::string cmd = std::string(PENNING_SIM_PATH) + " --config " + cfg.string() + " --out " +
                          (dir / "out").string() + " " + extra + " > " + (dir / "log.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json spins_127(double tau) {
  return {{"n_ions", 127}, {"j_bar_rad_s", 3300.0}, {"gamma_el", 171.6}, {"gamma_ud", 9.2}, {"gamma_du", 6.5},
          {"tau_s", tau}};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config validation") {
    CHECK_THROWS_AS(parse_config({{"experiment", "dynamics"}, {"spins", spins_127(0.0)}, {"scan", {{"tau_s", json::array()}}}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({{"experiment", "dynamics"}, {"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"experiment", "counting"}, {"spins", {{"n_ions", 3}, {"j_bar_hz", 1.0}, {"colour", 2}}}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({{"experiment", "teleport"}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"experiment", "dynamics"},
                                  {"spins", {{"n_ions", 3}, {"j_bar_hz", 1.0}, {"j_bar_rad_s", 1.0}}},
                                  {"scan", {{"tau_s", {1e-3}}}}}),
                    ConfigError);
    const RunConfig c = parse_config({{"experiment", "dynamics"},
                                      {"spins", {{"n_ions", 3}, {"j_bar_hz", 1000.0}}},
                                      {"scan", {{"tau_s", {1e-3}}}}});
    CHECK(c.spins.j_bar == doctest::Approx(2.0 * M_PI * 1000.0));
    CHECK(c.resolved["spins"]["gamma_el"] == 0.0);
  }

  TEST_CASE("empty tau grid is a config error and writes nothing") {
    const fs::path dir = scratch("empty");
    const json cfg{{"experiment", "dynamics"}, {"spins", spins_127(0.0)}, {"scan", {{"tau_s", json::array()}}}};
    CHECK(run_binary(cfg, dir) == exit_config);
    CHECK_FALSE(fs::exists(dir / "out"));
  }

  TEST_CASE("exit codes") {
    const fs::path dir = scratch("codes");
    CHECK(run_binary({{"experiment", "noise-budget"}, {"mystery", true}}, dir) == exit_config);
    // A negative target coupling above the COM mode is a physics-domain error.
    const json crystal{{"n_ions", 7},         {"axial_frequency_hz", 1.58e6}, {"rotation_frequency_hz", 180e3},
                       {"magnetic_field_t", 4.45}, {"force_yn", 30.0},          {"detuning_hz", 1e3},
                       {"target_j_bar_hz", -500.0}};
    CHECK(run_binary({{"experiment", "crystal"}, {"crystal", crystal}}, dir) == exit_domain);
    CHECK(run_binary({{"experiment", "noise-budget"}, {"noise_budget", {{"detuning_hz", 0.0}}}}, dir) == exit_config);
    // An unattainable oracle tolerance reports an invariant violation.
    CHECK(run_binary({{"experiment", "validate-oracle"}, {"oracle", {{"n_list", {2}}, {"draws", 2}, {"tolerance", 0.0}}}},
                     dir) == exit_invariant);
    CHECK(run_binary({{"experiment", "noise-budget"}}, dir) == exit_ok);
    const std::string cmd = std::string(PENNING_SIM_PATH) + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == exit_config);
  }

  TEST_CASE("noise budget table and metadata") {
    const fs::path dir = scratch("budget");
    REQUIRE(run_binary({{"experiment", "noise-budget"}}, dir) == exit_ok);
    const CsvTable t = read_csv(dir / "out" / "noise_budget.csv", true);
    CHECK(!t.rows.empty());
    CHECK(slurp(dir / "log.txt").find("shot_to_projection") != std::string::npos);
    const json meta = json::parse(slurp(dir / "out" / "metadata.json"));
    CHECK(meta["version"] == artifact_version);
    CHECK(meta["config"]["noise_budget"]["k_photons"] == 15.0);
  }

  TEST_CASE("dynamics CSV round-trips and reruns are bit-identical") {
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    const json cfg{{"experiment", "dynamics"},
                   {"seed", 17},
                   {"spins", spins_127(0.0)},
                   {"scan", {{"tau_s", {0.0, 0.5e-3, 1e-3, 2e-3, 3e-3}}}}};
    REQUIRE(run_binary(cfg, a) == exit_ok);
    REQUIRE(run_binary(cfg, b, "--threads 1") == exit_ok);
    CHECK(slurp(a / "out" / "dynamics.csv") == slurp(b / "out" / "dynamics.csv"));
    const CsvTable t = read_csv(a / "out" / "dynamics.csv");
    write_csv(a / "copy.csv", t);
    CHECK(read_csv(a / "copy.csv") == t);
    CHECK(slurp(a / "copy.csv") == slurp(a / "out" / "dynamics.csv"));
    REQUIRE(t.rows.size() == 5);
    CHECK(t.rows[0][3] == doctest::Approx(63.5));
  }

  TEST_CASE("counting histograms for the paper angles") {
    const fs::path dir = scratch("counting");
    const json cfg{{"experiment", "counting"}, {"spins", spins_127(3e-3)}, {"scan", {{"psi_deg", {88.0, 174.6}}}}};
    REQUIRE(run_binary(cfg, dir) == exit_ok);
    for (const char* name : {"counting_psi_88.csv", "counting_psi_174.6.csv"}) {
      const CsvTable t = read_csv(dir / "out" / name);
      REQUIRE(t.rows.size() == 128);
      double total = 0.0;
      for (const auto& r : t.rows) total += r[2];
      CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
    // The squeezed quadrature is narrower than the anti-squeezed one.
    const json meta = json::parse(slurp(dir / "out" / "metadata.json"));
    CHECK(meta["summary"][1]["variance"].get<double>() < meta["summary"][0]["variance"].get<double>());
  }

  TEST_CASE("decoupling-locked dynamics decays faster than decoherence alone") {
    const fs::path dir = scratch("locked");
    json spins{{"n_ions", 144}, {"gamma_el", 171.6}, {"gamma_ud", 9.2}, {"gamma_du", 6.5}};
    json taus = json::array();
    for (int k = 1; k <= 12; ++k) taus.push_back(0.25e-3 * k);
    const json cfg{{"experiment", "dynamics"},
                   {"spins", spins},
                   {"decoupling_lock", {{"force_yn", 30.0}, {"axial_frequency_hz", 1.57e6}}},
                   {"scan", {{"tau_s", taus}}}};
    REQUIRE(run_binary(cfg, dir) == exit_ok);
    const CsvTable t = read_csv(dir / "out" / "dynamics.csv");
    REQUIRE(t.rows.size() == 12);
    // Columns: tau, J, detuning, contrast, normalized contrast, decoherence only.
    // delta = 4 pi / tau shrinks along the scan, so J grows in proportion to tau.
    for (const auto& r : t.rows) CHECK(r[1] / r[0] == doctest::Approx(t.rows[0][1] / t.rows[0][0]).epsilon(1e-12));
    CHECK(t.rows.back()[4] < 0.5 * t.rows.back()[5]);
    for (const auto& r : t.rows) CHECK(r[4] <= r[5] + 1e-12);
  }
}
