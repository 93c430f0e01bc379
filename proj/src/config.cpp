#include "penning/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "penning/constants.hpp"
#include "penning/errors.hpp"

namespace penning {

namespace {

using nlohmann::json;

constexpr double deg = std::numbers::pi / 180.0;

// Reads one JSON object, rejecting unknown keys and recording every value used
// (including defaults) into the resolved copy.
class Section {
 public:
  Section(const json& node, json& resolved, std::string where, std::set<std::string> allowed)
      : node_(node), resolved_(resolved), where_(std::move(where)) {
    if (!node_.is_object()) throw ConfigError(where_ + " must be a JSON object");
    resolved_ = json::object();
    for (const auto& [key, value] : node_.items()) {
      if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where_);
    }
  }

  [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key); }

  double number(const std::string& key) {
    require(key);
    return record(key, as_number(node_.at(key), key));
  }
  double number(const std::string& key, double fallback) {
    return record(key, has(key) ? as_number(node_.at(key), key) : fallback);
  }
  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    const std::uint64_t v = has(key) ? as_count(node_.at(key), key) : fallback;
    resolved_[key] = v;
    return v;
  }
  bool flag(const std::string& key, bool fallback) {
    bool v = fallback;
    if (has(key)) {
      if (!node_.at(key).is_boolean()) throw ConfigError(where_ + "." + key + " must be a boolean");
      v = node_.at(key).get<bool>();
    }
    resolved_[key] = v;
    return v;
  }
  std::string text(const std::string& key) {
    require(key);
    if (!node_.at(key).is_string()) throw ConfigError(where_ + "." + key + " must be a string");
    resolved_[key] = node_.at(key);
    return node_.at(key).get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& arr = node_.at(key);
    if (!arr.is_array()) throw ConfigError(where_ + "." + key + " must be an array");
    for (const auto& v : arr) out.push_back(as_number(v, key));
    resolved_[key] = out;
    return out;
  }
  std::vector<std::size_t> counts(const std::string& key) {
    std::vector<std::size_t> out;
    if (!has(key)) return out;
    const json& arr = node_.at(key);
    if (!arr.is_array()) throw ConfigError(where_ + "." + key + " must be an array");
    for (const auto& v : arr) out.push_back(static_cast<std::size_t>(as_count(v, key)));
    resolved_[key] = out;
    return out;
  }
  const json& child(const std::string& key) const { return node_.at(key); }
  json& resolved_child(const std::string& key) { return resolved_[key]; }
  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  void require(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required key '" + key + "' in " + where_);
  }
  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) throw ConfigError(where_ + "." + key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where_ + "." + key + " must be finite");
    return d;
  }
  std::uint64_t as_count(const json& v, const std::string& key) const {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(where_ + "." + key + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  double record(const std::string& key, double v) {
    resolved_[key] = v;
    return v;
  }

  const json& node_;
  json& resolved_;
  std::string where_;
};

double hz(double f) { return constants::two_pi * f; }

// Exactly one of <stem>_hz (J/h in Hz) or <stem>_rad_s.
std::optional<double> coupling_key(Section& s, const std::string& stem) {
  const bool in_hz = s.has(stem + "_hz");
  const bool in_rad = s.has(stem + "_rad_s");
  if (in_hz && in_rad) throw ConfigError("give only one of " + stem + "_hz and " + stem + "_rad_s in " + s.where());
  if (in_hz) return convert_coupling(s.number(stem + "_hz"));
  if (in_rad) return s.number(stem + "_rad_s");
  return std::nullopt;
}

void parse_spins(Section& s, RunConfig& cfg) {
  cfg.spins.n_ions = static_cast<std::size_t>(s.count("n_ions", 0));
  if (cfg.spins.n_ions == 0) throw ConfigError("spins.n_ions must be >= 1");
  const auto j = coupling_key(s, "j_bar");
  cfg.spins_has_coupling = j.has_value();
  cfg.spins.j_bar = j.value_or(0.0);
  cfg.spins.gamma_el = s.number("gamma_el", 0.0);
  cfg.spins.gamma_ud = s.number("gamma_ud", 0.0);
  cfg.spins.gamma_du = s.number("gamma_du", 0.0);
  cfg.spins.tau = s.number("tau_s", 0.0);
  validate(cfg.spins);
}

TrapConfig parse_trap(Section& s) {
  TrapConfig trap;
  trap.omega_z = hz(s.number("axial_frequency_hz"));
  trap.omega_r = hz(s.number("rotation_frequency_hz"));
  trap.omega_q = hz(s.number("wall_frequency_hz", 0.0));
  trap.ion_mass = s.number("ion_mass_amu", constants::be9_mass / constants::atomic_mass) * constants::atomic_mass;
  trap.ion_charge = s.number("ion_charge_e", 1.0) * constants::elementary_charge;
  const bool has_b = s.has("magnetic_field_t");
  const bool has_c = s.has("cyclotron_frequency_hz");
  if (has_b == has_c) throw ConfigError("give exactly one of magnetic_field_t and cyclotron_frequency_hz in " + s.where());
  trap.omega_c = has_b ? cyclotron_frequency(s.number("magnetic_field_t"), trap.ion_mass, trap.ion_charge)
                       : hz(s.number("cyclotron_frequency_hz"));
  return validate(trap);
}

std::vector<double> require_nonempty(std::vector<double> v, const std::string& what) {
  if (v.empty()) throw ConfigError(what + " must not be empty");
  return v;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::crystal: return "crystal";
    case Experiment::dynamics: return "dynamics";
    case Experiment::squeezing_scan: return "squeezing-scan";
    case Experiment::counting: return "counting";
    case Experiment::fisher: return "fisher";
    case Experiment::noise_budget: return "noise-budget";
    case Experiment::validate_oracle: return "validate-oracle";
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  for (Experiment e : {Experiment::crystal, Experiment::dynamics, Experiment::squeezing_scan, Experiment::counting,
                       Experiment::fisher, Experiment::noise_budget, Experiment::validate_oracle}) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

RunConfig parse_config(const json& input) {
  RunConfig cfg;
  Section top(input, cfg.resolved, "config",
              {"experiment", "seed", "threads", "output_dir", "spins", "crystal", "decoupling_lock", "scan", "noise",
               "squeezing", "fisher", "noise_budget", "oracle"});
  cfg.experiment = experiment_from_string(top.text("experiment"));
  cfg.seed = top.count("seed", 0);
  cfg.threads = static_cast<unsigned>(top.count("threads", 0));
  if (top.has("output_dir")) cfg.output_dir = top.text("output_dir");

  if (top.has("spins")) {
    Section s(top.child("spins"), top.resolved_child("spins"), "spins",
              {"n_ions", "j_bar_hz", "j_bar_rad_s", "gamma_el", "gamma_ud", "gamma_du", "tau_s"});
    parse_spins(s, cfg);
  }
  if (top.has("crystal")) {
    Section s(top.child("crystal"), top.resolved_child("crystal"), "crystal",
              {"n_ions", "axial_frequency_hz", "rotation_frequency_hz", "wall_frequency_hz", "magnetic_field_t",
               "cyclotron_frequency_hz", "ion_mass_amu", "ion_charge_e", "force_yn", "detuning_hz",
               "delta_k_rad_per_m", "target_j_bar_hz", "target_j_bar_rad_s", "temperature_k"});
    CrystalSection c;
    c.n_ions = static_cast<std::size_t>(s.count("n_ions", 0));
    if (c.n_ions < 2) throw ConfigError("crystal.n_ions must be >= 2");
    c.trap = parse_trap(s);
    c.f0 = s.number("force_yn") * 1e-24;
    c.detuning = hz(s.number("detuning_hz"));
    c.delta_k = s.number("delta_k_rad_per_m", constants::two_pi / 0.9e-6);
    c.target_j_bar = coupling_key(s, "target_j_bar");
    c.temperature = s.number("temperature_k", 0.5e-3);
    if (!(c.f0 > 0.0)) throw ConfigError("crystal.force_yn must be > 0");
    if (c.detuning == 0.0) throw ConfigError("crystal.detuning_hz must be nonzero");
    if (c.temperature < 0.0) throw ConfigError("crystal.temperature_k must be >= 0");
    cfg.crystal = c;
  }
  if (top.has("decoupling_lock")) {
    Section s(top.child("decoupling_lock"), top.resolved_child("decoupling_lock"), "decoupling_lock",
              {"force_yn", "axial_frequency_hz", "ion_mass_amu", "harmonic"});
    DecouplingLock lock;
    lock.f0 = s.number("force_yn") * 1e-24;
    lock.omega_z = hz(s.number("axial_frequency_hz"));
    lock.ion_mass = s.number("ion_mass_amu", constants::be9_mass / constants::atomic_mass) * constants::atomic_mass;
    lock.harmonic = s.number("harmonic", 2.0);
    if (!(lock.f0 > 0.0) || !(lock.omega_z > 0.0) || !(lock.ion_mass > 0.0) || !(lock.harmonic > 0.0)) {
      throw ConfigError("decoupling_lock values must be > 0");
    }
    cfg.lock = lock;
  }
  if (top.has("scan")) {
    Section s(top.child("scan"), top.resolved_child("scan"), "scan", {"tau_s", "psi_deg", "n_list", "theta_rad"});
    cfg.scan.tau = s.numbers("tau_s");
    for (double t : cfg.scan.tau) {
      if (t < 0.0) throw ConfigError("scan.tau_s entries must be >= 0");
    }
    for (double p : s.numbers("psi_deg")) cfg.scan.psi.push_back(p * deg);
    cfg.scan.n_list = s.counts("n_list");
    for (std::size_t n : cfg.scan.n_list) {
      if (n == 0) throw ConfigError("scan.n_list entries must be >= 1");
    }
    cfg.scan.theta = s.numbers("theta_rad");
  }
  if (top.has("noise")) {
    Section s(top.child("noise"), top.resolved_child("noise"), "noise",
              {"bfield", "shot_sigma", "dephasing_a_per_ms2", "dephasing_b_per_ms4"});
    cfg.noise.bfield = s.flag("bfield", false);
    cfg.noise.shot_sigma = s.number("shot_sigma", 0.0);
    cfg.noise.fit.a_per_ms2 = s.number("dephasing_a_per_ms2", cfg.noise.fit.a_per_ms2);
    cfg.noise.fit.b_per_ms4 = s.number("dephasing_b_per_ms4", cfg.noise.fit.b_per_ms4);
    if (cfg.noise.shot_sigma < 0.0) throw ConfigError("noise.shot_sigma must be >= 0");
  }
  if (top.has("squeezing")) {
    Section s(top.child("squeezing"), top.resolved_child("squeezing"), "squeezing",
              {"gamma_over_j", "rate_weights"});
    cfg.squeezing.gamma_over_j = s.optional_number("gamma_over_j");
    const auto w = s.numbers("rate_weights");
    if (!w.empty()) {
      if (w.size() != 3) throw ConfigError("squeezing.rate_weights needs [el, ud, du]");
      cfg.squeezing.rate_el = w[0];
      cfg.squeezing.rate_ud = w[1];
      cfg.squeezing.rate_du = w[2];
    }
    if (cfg.squeezing.gamma_over_j && *cfg.squeezing.gamma_over_j < 0.0) {
      throw ConfigError("squeezing.gamma_over_j must be >= 0");
    }
  }
  if (top.has("fisher")) {
    Section s(top.child("fisher"), top.resolved_child("fisher"), "fisher",
              {"psi_deg", "window_rad", "points", "edge_distance"});
    if (auto p = s.optional_number("psi_deg")) cfg.fisher.psi = *p * deg;
    cfg.fisher.window = s.number("window_rad", 0.0);
    cfg.fisher.points = static_cast<std::size_t>(s.count("points", 13));
    cfg.fisher.edge_distance = s.number("edge_distance", 0.1);
    if (cfg.fisher.points < 5) throw ConfigError("fisher.points must be >= 5");
  }
  {
    const json empty = json::object();
    Section s(top.has("noise_budget") ? top.child("noise_budget") : empty, top.resolved_child("noise_budget"),
              "noise_budget",
              {"k_photons", "classical_noise_fraction", "n_ions", "tau_s", "psi_deg", "delta_n", "force_yn",
               "detuning_hz", "axial_frequency_hz", "ion_mass_amu", "t_pi_s", "nbar", "epsilon", "radius_m",
               "misalignment_deg", "delta_k_rad_per_m"});
    auto& b = cfg.budget;
    b.detection.k_photons = s.number("k_photons", 15.0);
    b.detection.classical_noise_fraction = s.number("classical_noise_fraction", 0.3);
    validate(b.detection);
    b.n_ions = static_cast<std::size_t>(s.count("n_ions", 124));
    b.tau = s.number("tau_s", 6e-3);
    b.psi = s.number("psi_deg", 90.0) * deg;
    b.delta_n = s.number("delta_n", 0.1);
    b.f0 = s.number("force_yn", 30.0) * 1e-24;
    b.delta = hz(s.number("detuning_hz", 1e3));
    b.omega_z = hz(s.number("axial_frequency_hz", 1.6e6));
    b.ion_mass = s.number("ion_mass_amu", constants::be9_mass / constants::atomic_mass) * constants::atomic_mass;
    b.t_pi = s.number("t_pi_s", 60e-6);
    b.nbar = s.number("nbar", 12.0);
    b.epsilon = s.number("epsilon", 0.5);
    b.radius = s.number("radius_m", 125e-6);
    b.misalignment = s.number("misalignment_deg", 0.01) * deg;
    b.delta_k = s.number("delta_k_rad_per_m", constants::two_pi / 0.9e-6);
    if (b.delta == 0.0) throw ConfigError("noise_budget.detuning_hz must be nonzero");
    if (!(b.omega_z > 0.0) || !(b.ion_mass > 0.0)) throw ConfigError("noise_budget trap values must be > 0");
  }
  {
    const json empty = json::object();
    Section s(top.has("oracle") ? top.child("oracle") : empty, top.resolved_child("oracle"), "oracle",
              {"n_list", "draws", "tolerance"});
    auto n_list = s.counts("n_list");
    if (!n_list.empty()) cfg.oracle.n_list = n_list;
    cfg.oracle.draws = static_cast<std::size_t>(s.count("draws", 25));
    cfg.oracle.tolerance = s.number("tolerance", 1e-6);
  }

  // Experiment-specific requirements, checked before any computation.
  const auto need_spins = [&] {
    if (!top.has("spins")) throw ConfigError(to_string(cfg.experiment) + " needs a spins section");
  };
  switch (cfg.experiment) {
    case Experiment::crystal:
      if (!cfg.crystal) throw ConfigError("crystal experiment needs a crystal section");
      break;
    case Experiment::dynamics:
      need_spins();
      require_nonempty(cfg.scan.tau, "scan.tau_s");
      if (!cfg.lock && !cfg.spins_has_coupling) throw ConfigError("dynamics needs spins.j_bar_* or decoupling_lock");
      for (double t : cfg.scan.tau) {
        if (cfg.lock && t == 0.0) throw ConfigError("decoupling-locked scan needs tau_s > 0");
      }
      break;
    case Experiment::squeezing_scan:
      need_spins();
      if (cfg.scan.n_list.empty()) throw ConfigError("scan.n_list must not be empty");
      if (!(cfg.spins.j_bar > 0.0)) throw ConfigError("squeezing-scan needs spins.j_bar_* > 0");
      break;
    case Experiment::counting:
      need_spins();
      require_nonempty(cfg.scan.psi, "scan.psi_deg");
      break;
    case Experiment::fisher:
      need_spins();
      if (!cfg.scan.theta.empty() && cfg.scan.theta.size() < 5) throw ConfigError("scan.theta_rad needs >= 5 angles");
      break;
    case Experiment::noise_budget:
      break;
    case Experiment::validate_oracle:
      if (cfg.oracle.n_list.empty() || cfg.oracle.draws == 0) throw ConfigError("oracle scan is empty");
      for (std::size_t n : cfg.oracle.n_list) {
        if (n < 1 || n > 8) throw ConfigError("oracle.n_list entries must be in [1, 8]");
      }
      break;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json input;
  try {
    input = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
  return parse_config(input);
}

}  // namespace penning
