#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "penning/counting.hpp"
#include "penning/model.hpp"
#include "penning/noise_budget.hpp"

// Run configuration read from JSON. Frequencies are given in Hz and converted
// to rad/s here; every object rejects keys it does not know.

namespace penning {

enum class Experiment { crystal, dynamics, squeezing_scan, counting, fisher, noise_budget, validate_oracle };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

struct CrystalSection {
  TrapConfig trap;
  std::size_t n_ions = 0;
  double f0 = 0.0;          // N
  double detuning = 0.0;    // mu - omega_COM, rad/s
  double delta_k = 0.0;     // rad/m
  std::optional<double> target_j_bar;  // rad/s; rescales f0
  double temperature = 0.0;            // K
};

// Each tau point sets delta = harmonic * 2 pi / tau and J = F0^2 / (4 hbar M omega_z delta).
struct DecouplingLock {
  double f0 = 0.0;
  double omega_z = 0.0;
  double ion_mass = 0.0;
  double harmonic = 2.0;
};

struct ScanSection {
  std::vector<double> tau;          // s
  std::vector<double> psi;          // rad
  std::vector<std::size_t> n_list;
  std::vector<double> theta;        // rad
};

struct NoiseSection {
  bool bfield = false;
  double shot_sigma = 0.0;
  DephasingFit fit;
};

struct SqueezingSection {
  std::optional<double> gamma_over_j;            // Gamma / J_bar; rates rescaled keeping their ratios
  double rate_el = 171.6, rate_ud = 9.2, rate_du = 6.5;  // relative weights used with gamma_over_j
};

struct FisherSection {
  std::optional<double> psi;   // rad
  double window = 0.0;         // rad, 0 = adaptive
  std::size_t points = 13;
  double edge_distance = 0.1;
};

struct NoiseBudgetSection {
  DetectionConfig detection;
  std::size_t n_ions = 124;
  double tau = 6e-3;
  double psi = 1.5707963267948966;
  double delta_n = 0.1;
  double f0 = 30e-24;
  double delta = 0.0;      // rad/s
  double omega_z = 0.0;    // rad/s
  double ion_mass = 0.0;
  double t_pi = 60e-6;
  double nbar = 12.0;
  double epsilon = 0.5;
  double radius = 125e-6;
  double misalignment = 0.0;  // rad
  double delta_k = 0.0;
};

struct OracleSection {
  std::vector<std::size_t> n_list{2, 3, 4, 5, 6};
  std::size_t draws = 25;
  double tolerance = 1e-6;
};

struct RunConfig {
  Experiment experiment = Experiment::dynamics;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::optional<std::filesystem::path> output_dir;
  SpinEnsembleParams spins;
  bool spins_has_coupling = false;
  std::optional<CrystalSection> crystal;
  std::optional<DecouplingLock> lock;
  ScanSection scan;
  NoiseSection noise;
  SqueezingSection squeezing;
  FisherSection fisher;
  NoiseBudgetSection budget;
  OracleSection oracle;
  nlohmann::json resolved;  // input with every default filled in
};

// Throws ConfigError on any schema or value violation.
RunConfig parse_config(const nlohmann::json& input);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace penning
