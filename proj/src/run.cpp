#include "penning/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include "CLI11.hpp"
#include "penning/constants.hpp"
#include "penning/crystal.hpp"
#include "penning/csv.hpp"
#include "penning/dynamics.hpp"
#include "penning/errors.hpp"
#include "penning/fisher.hpp"
#include "penning/noise_budget.hpp"
#include "penning/parallel.hpp"
#include "penning/validation.hpp"

namespace penning {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double rad_to_deg = 180.0 / std::numbers::pi;
constexpr double infinity = std::numeric_limits<double>::infinity();

// Outer scans hand one thread to each inner computation.
unsigned inner_threads(const RunConfig& cfg, std::size_t outer_points) {
  return outer_points > 1 && resolve_threads(cfg.threads) > 1 ? 1 : cfg.threads;
}

void write_json(const fs::path& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << value.dump(2) << '\n';
}

std::string angle_tag(double psi) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", psi * rad_to_deg);
  return buf;
}

RunResult run_crystal(const RunConfig& cfg, const fs::path& dir) {
  const CrystalSection& c = *cfg.crystal;
  const CrystalState state = equilibrium_positions(c.trap, c.n_ions);
  const ModeSpectrum modes = axial_modes(state);
  DriveConfig drive{c.f0, modes.frequencies[0] + c.detuning, c.delta_k};
  if (c.target_j_bar) drive = drive_for_mean_coupling(modes, drive, c.trap.ion_mass, *c.target_j_bar);
  const CouplingMatrix j = coupling_matrix(modes, drive, c.trap.ion_mass);
  const PowerLawFit fit = power_law_fit(j, state);
  const ThermalExtent th = thermal_extent(modes, c.temperature, c.delta_k, c.trap.ion_mass);

  std::size_t center = 0;
  std::size_t edge = 0;
  CsvTable positions{{"ion", "x_m", "y_m", "radius_m", "z_rms_m", "dwf"}, {}, {}};
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double r = state.positions[i].norm();
    if (r < state.positions[center].norm()) center = i;
    if (r > state.positions[edge].norm()) edge = i;
    positions.add_row({static_cast<double>(i), state.positions[i].x(), state.positions[i].y(), r, th.z_rms[i], th.dwf[i]});
  }
  CsvTable mode_table{{"mode", "frequency_hz"}, {}, {}};
  for (std::size_t m = 0; m < modes.size(); ++m) {
    mode_table.add_row({static_cast<double>(m), modes.frequencies[m] / constants::two_pi});
  }
  CsvTable couplings{{"i", "j", "distance_m", "j_rad_s"}, {}, {}};
  for (std::size_t a = 0; a < j.size(); ++a) {
    for (std::size_t b = a + 1; b < j.size(); ++b) {
      couplings.add_row({static_cast<double>(a), static_cast<double>(b),
                         (state.positions[a] - state.positions[b]).norm(),
                         j.j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))});
    }
  }
  write_csv(dir / "crystal_positions.csv", positions);
  write_csv(dir / "crystal_modes.csv", mode_table);
  write_csv(dir / "crystal_couplings.csv", couplings);

  RunResult res;
  res.outputs = {"crystal_positions.csv", "crystal_modes.csv", "crystal_couplings.csv", "crystal_summary.json"};
  res.summary = {
      {"n_ions", c.n_ions},
      {"radius_m", state.radius()},
      {"length_scale_m", state.length_scale},
      {"gradient_max_norm", state.gradient_max_norm},
      {"com_frequency_hz", modes.frequencies[0] / constants::two_pi},
      {"com_relative_error", std::abs(modes.frequencies[0] - c.trap.omega_z) / c.trap.omega_z},
      {"next_mode_gap_hz", modes.size() > 1 ? (modes.frequencies[0] - modes.frequencies[1]) / constants::two_pi : 0.0},
      {"force_yn", drive.f0 * 1e24},
      {"detuning_hz", c.detuning / constants::two_pi},
      {"j_bar_rad_s", j.j_bar_effective},
      {"alpha", fit.alpha},
      {"z_rms_center_m", th.z_rms[center]},
      {"z_rms_edge_m", th.z_rms[edge]},
      {"dwf_center", th.dwf[center]},
      {"dwf_edge", th.dwf[edge]},
  };
  write_json(dir / "crystal_summary.json", res.summary);
  return res;
}

RunResult run_dynamics(const RunConfig& cfg, const fs::path& dir) {
  const auto& taus = cfg.scan.tau;
  std::vector<std::vector<double>> rows(taus.size());
  parallel_for(taus.size(), cfg.threads, [&](std::size_t i) {
    SpinEnsembleParams p = at_time(cfg.spins, taus[i]);
    double detuning = 0.0;
    if (cfg.lock) {
      detuning = cfg.lock->harmonic * constants::two_pi / taus[i];
      p.j_bar = com_coupling(cfg.lock->f0, cfg.lock->ion_mass, cfg.lock->omega_z, detuning);
    }
    const double v = cfg.noise.bfield ? dephasing_variance(taus[i], cfg.noise.fit) : 0.0;
    const double n = static_cast<double>(p.n_ions);
    double contrast_value = contrast(p) * std::exp(-0.5 * v);
    double xi = infinity;
    double psi = 0.0;
    double var = transverse_variance(p, 0.0, v);
    try {
      const SqueezingResult s = squeezing_parameter(p, v);
      xi = s.xi_r_squared;
      psi = s.psi_min;
      var = s.variance_min;
      contrast_value = s.contrast;
    } catch (const DomainError&) {
      // Fully depolarized point; xi stays infinite.
    }
    rows[i] = {taus[i],
               p.j_bar,
               detuning / constants::two_pi,
               contrast_value,
               contrast_value / (0.5 * n),
               std::exp(-p.gamma_total() * taus[i]),
               2.0 * p.j_bar * taus[i] / std::sqrt(n),
               var,
               xi,
               psi * rad_to_deg};
  });
  CsvTable table{{"tau_s", "j_bar_rad_s", "detuning_hz", "contrast", "normalized_contrast", "decoherence_only",
                  "scaled_time", "variance_min", "xi_r_squared", "psi_min_deg"},
                 {},
                 rows};
  write_csv(dir / "dynamics.csv", table);
  RunResult res;
  res.outputs = {"dynamics.csv"};
  res.summary = {{"points", taus.size()}, {"decoupling_locked", cfg.lock.has_value()}};
  return res;
}

RunResult run_squeezing(const RunConfig& cfg, const fs::path& dir) {
  const auto& ns = cfg.scan.n_list;
  std::vector<std::vector<double>> rows(ns.size());
  parallel_for(ns.size(), cfg.threads, [&](std::size_t i) {
    SpinEnsembleParams p = cfg.spins;
    p.n_ions = ns[i];
    SpinEnsembleParams coherent = p;
    coherent.gamma_el = coherent.gamma_ud = coherent.gamma_du = 0.0;
    if (cfg.squeezing.gamma_over_j) {
      const auto& w = cfg.squeezing;
      const double scale = *w.gamma_over_j * p.j_bar / (0.5 * (w.rate_el + w.rate_ud + w.rate_du));
      p.gamma_el = w.rate_el * scale;
      p.gamma_ud = w.rate_ud * scale;
      p.gamma_du = w.rate_du * scale;
    }
    const OptimalSqueezing a = optimal_squeezing(coherent);
    const OptimalSqueezing b = optimal_squeezing(p);
    rows[i] = {static_cast<double>(ns[i]), a.tau, a.xi_r_squared, b.tau, b.xi_r_squared,
               10.0 * std::log10(b.xi_r_squared), p.gamma_total()};
  });
  CsvTable table{{"n_ions", "tau_coherent_s", "xi2_coherent", "tau_s", "xi2", "xi2_db", "gamma_total"}, {}, rows};
  write_csv(dir / "squeezing_scan.csv", table);
  RunResult res;
  res.outputs = {"squeezing_scan.csv"};
  res.summary = {{"points", ns.size()}};
  return res;
}

RunResult run_counting(const RunConfig& cfg, const fs::path& dir) {
  const auto& psis = cfg.scan.psi;
  const double v = cfg.noise.bfield ? dephasing_variance(cfg.spins.tau, cfg.noise.fit) : 0.0;
  const unsigned inner = inner_threads(cfg, psis.size());
  std::vector<CountingDistribution> dists(psis.size());
  parallel_for(psis.size(), cfg.threads, [&](std::size_t i) {
    CountingOptions opts;
    opts.bfield_variance = v;
    opts.threads = inner;
    dists[i] = counting_distribution(MeasurementDirection::tomography(psis[i]), cfg.spins, opts);
    if (cfg.noise.shot_sigma > 0.0) dists[i] = convolve_shot_noise(dists[i], cfg.noise.shot_sigma);
  });
  RunResult res;
  res.summary = json::array();
  for (std::size_t i = 0; i < psis.size(); ++i) {
    const auto& d = dists[i];
    CsvTable table{{"n", "s_value", "probability"}, {}, {}};
    if (d.continuous) table.columns.push_back("density");
    for (std::size_t k = 0; k < d.probabilities.size(); ++k) {
      std::vector<double> row{static_cast<double>(k), d.s_value(k), d.probabilities[k]};
      if (d.continuous) row.push_back(d.continuous->weights[k]);
      table.add_row(std::move(row));
    }
    const std::string name = "counting_psi_" + angle_tag(psis[i]) + ".csv";
    write_csv(dir / name, table);
    res.outputs.push_back(name);
    res.summary.push_back({{"psi_deg", psis[i] * rad_to_deg}, {"mean", d.mean()}, {"variance", d.variance()}});
  }
  return res;
}

RunResult run_fisher(const RunConfig& cfg, const fs::path& dir) {
  NoiseFlags flags;
  flags.bfield_variance = cfg.noise.bfield ? dephasing_variance(cfg.spins.tau, cfg.noise.fit) : 0.0;
  flags.shot_sigma = cfg.noise.shot_sigma;
  HellingerScan scan;
  if (!cfg.scan.theta.empty()) {
    const double psi = cfg.fisher.psi ? *cfg.fisher.psi : squeezing_parameter(cfg.spins, flags.bfield_variance).psi_min;
    scan = hellinger_scan(cfg.spins, psi, cfg.scan.theta, flags, cfg.threads);
  } else {
    FisherOptions opts;
    opts.psi_ref = cfg.fisher.psi;
    opts.window = cfg.fisher.window;
    opts.points = cfg.fisher.points;
    opts.edge_distance = cfg.fisher.edge_distance;
    opts.threads = cfg.threads;
    scan = fisher_information(cfg.spins, flags, opts);
  }
  CsvTable table{{"theta_rad", "hellinger_sq"}, {}, {}};
  for (std::size_t i = 0; i < scan.thetas.size(); ++i) table.add_row({scan.thetas[i], scan.distances[i]});
  write_csv(dir / "fisher_scan.csv", table);
  RunResult res;
  res.outputs = {"fisher_scan.csv", "fisher_summary.json"};
  res.summary = {{"f_over_n", scan.fit_f_over_n}, {"c2", scan.c2},          {"c4", scan.c4},
                 {"window", scan.fit_window},     {"psi_ref_deg", scan.psi_ref * rad_to_deg},
                 {"max_residual", scan.max_residual}};
  write_json(dir / "fisher_summary.json", res.summary);
  return res;
}

RunResult run_noise_budget(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  const auto& b = cfg.budget;
  const double z0 = zero_point_extent(b.omega_z, b.ion_mass);
  const double eps_star = freq_error_threshold(b.f0, b.delta, b.t_pi, b.nbar, b.omega_z, b.ion_mass);
  CsvTable table{{"quantity", "value"}, {}, {}};
  table.add_row("shot_to_projection_ratio", {shot_to_projection_ratio(b.detection)});
  table.add_row("shot_to_projection_db", {10.0 * std::log10(shot_to_projection_ratio(b.detection))});
  table.add_row("shot_noise_variance", {shot_noise_variance(b.n_ions, b.detection)});
  table.add_row("classical_noise_fraction_reported", {b.detection.classical_noise_fraction});
  table.add_row("dephasing_variance_rad2", {dephasing_variance(b.tau, cfg.noise.fit)});
  table.add_row("bfield_variance", {bfield_variance(b.n_ions, b.tau, b.psi, cfg.noise.fit)});
  table.add_row("force_coupling_2f0z0_over_hbar_delta", {2.0 * b.f0 * z0 / (constants::hbar * b.delta)});
  table.add_row("heating_dephasing_ratio", {heating_dephasing_ratio(b.delta_n, b.f0, b.delta, b.omega_z, b.ion_mass)});
  table.add_row("freq_error_dephasing_ratio",
                {freq_error_dephasing_ratio(b.epsilon, b.f0, b.delta, b.t_pi, b.nbar, b.omega_z, b.ion_mass)});
  table.add_row("freq_error_threshold_epsilon", {eps_star});
  table.add_row("axial_frequency_error_hz", {axial_frequency_error(b.epsilon, b.delta) / constants::two_pi});
  table.add_row("axial_frequency_error_at_threshold_hz", {axial_frequency_error(eps_star, b.delta) / constants::two_pi});
  table.add_row("lattice_phase_spread_rad", {lattice_phase_spread(b.radius, b.misalignment, b.delta_k)});
  table.add_row("lattice_phase_spread_deg", {lattice_phase_spread(b.radius, b.misalignment, b.delta_k) * rad_to_deg});
  write_csv(dir / "noise_budget.csv", table);

  RunResult res;
  res.outputs = {"noise_budget.csv"};
  res.summary = json::object();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "%-40s %14.6g\n", table.labels[i].c_str(), table.rows[i][0]);
    log << line;
    res.summary[table.labels[i]] = table.rows[i][0];
  }
  return res;
}

RunResult run_validate_oracle(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  struct Task {
    std::size_t n;
    std::size_t draw;
  };
  std::vector<Task> tasks;
  for (std::size_t n : cfg.oracle.n_list) {
    for (std::size_t d = 0; d < cfg.oracle.draws; ++d) tasks.push_back({n, d});
  }
  const std::vector<MeasurementDirection> dirs{MeasurementDirection::tomography(0.0),
                                               MeasurementDirection::tomography(std::numbers::pi / 2),
                                               MeasurementDirection::tomography(0.3),
                                               MeasurementDirection::rotated_tomography(0.7, 0.4)};
  std::vector<std::vector<double>> rows(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(tasks[i].n), static_cast<std::uint32_t>(tasks[i].draw)};
    std::mt19937_64 rng(seq);
    const SpinEnsembleParams p = random_oracle_params(tasks[i].n, rng);
    const OracleComparison cmp = compare_with_oracle(p, dirs);
    rows[i] = {static_cast<double>(p.n_ions), static_cast<double>(tasks[i].draw), p.j_bar, p.gamma_el, p.gamma_ud,
               p.gamma_du, p.tau, cmp.correlators, cmp.contrast, cmp.moments, cmp.counting};
  });
  CsvTable table{{"n_ions", "draw", "j_bar_rad_s", "gamma_el", "gamma_ud", "gamma_du", "tau_s", "err_correlators",
                  "err_contrast", "err_moments", "err_counting"},
                 {},
                 rows};
  write_csv(dir / "validate_oracle.csv", table);
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max({worst, r[7], r[8], r[9], r[10]});
  log << "oracle comparisons: " << rows.size() << ", max abs error " << worst << '\n';
  RunResult res;
  res.outputs = {"validate_oracle.csv"};
  res.summary = {{"comparisons", rows.size()}, {"max_abs_error", worst}, {"tolerance", cfg.oracle.tolerance}};
  if (!(worst <= cfg.oracle.tolerance)) {
    write_json(dir / "metadata.json", {{"experiment", to_string(cfg.experiment)}, {"summary", res.summary}});
    throw InvariantError("analytic results disagree with the oracle beyond tolerance");
  }
  return res;
}

}  // namespace

RunResult run(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  RunResult res;
  switch (config.experiment) {
    case Experiment::crystal: res = run_crystal(config, out_dir); break;
    case Experiment::dynamics: res = run_dynamics(config, out_dir); break;
    case Experiment::squeezing_scan: res = run_squeezing(config, out_dir); break;
    case Experiment::counting: res = run_counting(config, out_dir); break;
    case Experiment::fisher: res = run_fisher(config, out_dir); break;
    case Experiment::noise_budget: res = run_noise_budget(config, out_dir, log); break;
    case Experiment::validate_oracle: res = run_validate_oracle(config, out_dir, log); break;
  }
  const json metadata{{"artifact", "penning_sim"},
                      {"version", artifact_version},
                      {"experiment", to_string(config.experiment)},
                      {"config", config.resolved},
                      {"outputs", res.outputs},
                      {"summary", res.summary}};
  write_json(out_dir / "metadata.json", metadata);
  res.outputs.push_back("metadata.json");
  return res;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dissipative Ising spin-squeezing and Penning-crystal simulator"};
  std::string config_path;
  std::string out_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (default: config output_dir or .)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores");
  app.add_option("--seed", seed, "random seed override");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (threads) {
      cfg.threads = *threads;
      cfg.resolved["threads"] = *threads;
    }
    if (seed) {
      cfg.seed = *seed;
      cfg.resolved["seed"] = *seed;
    }
    const fs::path dir = !out_dir.empty() ? fs::path(out_dir) : cfg.output_dir.value_or(fs::path("."));
    const RunResult res = run(cfg, dir, out);
    for (const auto& name : res.outputs) out << "wrote " << (dir / name).string() << '\n';
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const DomainError& e) {
    err << "physics domain error: " << e.what() << '\n';
    return exit_domain;
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << '\n';
    return exit_invariant;
  } catch (const fs::filesystem_error& e) {
    err << "output error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return exit_invariant;
  }
}

}  // namespace penning
