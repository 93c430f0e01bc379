// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "penning/constants.hpp"
#include "penning/counting.hpp"
#include "penning/crystal.hpp"
#include "penning/dynamics.hpp"
#include "penning/fisher.hpp"
#include "penning/noise_budget.hpp"
#include "penning/validation.hpp"

using namespace penning;

namespace {

constexpr double two_pi = constants::two_pi;

double deg(double d) { return d * std::numbers::pi / 180.0; }

bool within_rel(double value, double target, double tol) { return std::abs(value - target) <= tol * std::abs(target); }

// Rounds to two significant figures.
double sig2(double v) {
  if (v == 0.0) return 0.0;
  const double scale = std::pow(10.0, std::floor(std::log10(std::abs(v))) - 1.0);
  return std::round(v / scale) * scale;
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome criterion_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20160915);
  double worst = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int draw = 0; draw < 25; ++draw) {
      const SpinEnsembleParams p = random_oracle_params(n, rng);
      std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
      const std::vector<MeasurementDirection> dirs{MeasurementDirection::tomography(angle(rng)),
                                                   MeasurementDirection::rotated_tomography(angle(rng), 0.4)};
      worst = std::max(worst, compare_with_oracle(p, dirs).max());
      ++count;
    }
  }
  const double elapsed = seconds_since(t0);
  o.detail << count << " draws, max abs error " << worst << ", " << elapsed << " s";
  o.require(worst < 1e-6, "error >= 1e-6");
  o.require(elapsed < 60.0, "runtime >= 60 s");
  return o;
}

Outcome criterion_fisher() {
  Outcome o;
  const auto t0 = Clock::now();
  const SpinEnsembleParams p = fixtures::paper_params(3e-3);
  SpinEnsembleParams coherent = p;
  coherent.gamma_el = coherent.gamma_ud = coherent.gamma_du = 0.0;
  const double decohered = fisher_information(p, {.bfield_variance = fixtures::paper_dephasing}).fit_f_over_n;
  const double shot =
      fisher_information(p, {.bfield_variance = fixtures::paper_dephasing, .shot_sigma = 0.03}).fit_f_over_n;
  const double ideal = fisher_information(coherent).fit_f_over_n;
  const double elapsed = seconds_since(t0);
  o.detail << "F/N = " << decohered << " (2.1), " << shot << " (0.57), " << ideal << " (34.4), " << elapsed << " s";
  o.require(within_rel(decohered, 2.1, 0.15), "decoherence + B-field");
  o.require(within_rel(shot, 0.57, 0.15), "with shot noise");
  o.require(within_rel(ideal, 34.4, 0.15), "coherent");
  o.require(elapsed < 600.0, "runtime >= 10 min");
  return o;
}

struct PaperCrystal {
  CrystalState state;
  ModeSpectrum modes;
};

PaperCrystal paper_crystal(double axial_hz) {
  PaperCrystal c;
  c.state = equilibrium_positions(fixtures::paper_trap(axial_hz), 127);
  c.modes = axial_modes(c.state);
  return c;
}

Outcome criterion_uniform_validity() {
  Outcome o;
  const PaperCrystal c = paper_crystal(1.58e6);
  const double mass = c.state.trap.ion_mass;
  DriveConfig drive{30e-24, c.modes.frequencies[0] + two_pi * 1e3, two_pi / 0.9e-6};
  drive = drive_for_mean_coupling(c.modes, drive, mass, fixtures::paper_j_bar);
  const CouplingMatrix j = coupling_matrix(c.modes, drive, mass);
  double worst_contrast = 0.0, worst_variance = 0.0;
  for (int k = 1; k <= 30; ++k) {
    const SpinEnsembleParams p = fixtures::paper_params(1e-4 * k);
    const CorrelatorSet u = correlators_uniform(p);
    const GeneralCorrelators g = correlators_general(j, p);
    const double cu = contrast(p), cg = contrast(g);
    worst_contrast = std::max(worst_contrast, std::abs(cg - cu) / cu);
    const double psi_opt = squeezing_parameter(p).psi_min;
    for (double ps : {psi_opt, psi_opt + std::numbers::pi / 2}) {
      const auto dir = MeasurementDirection::tomography(ps);
      const double vu = spin_moments(u, p.n_ions, dir).variance;
      const double vg = spin_moments(g, dir).variance;
      worst_variance = std::max(worst_variance, std::abs(vg - vu) / vu);
    }
  }
  o.detail << "J_bar_eff = " << j.j_bar_effective << " rad/s, max rel diff contrast " << worst_contrast
           << ", variance " << worst_variance;
  o.require(worst_contrast < 0.05, "contrast");
  o.require(worst_variance < 0.05, "variance");
  return o;
}

Outcome criterion_crystal() {
  Outcome o;
  const PaperCrystal c = paper_crystal(1.58e6);
  const double mass = c.state.trap.ion_mass;
  const double wz = c.state.trap.omega_z;
  const DriveConfig drive{30e-24, c.modes.frequencies[0] + two_pi * 1e3, two_pi / 0.9e-6};
  const PowerLawFit fit = power_law_fit(coupling_matrix(c.modes, drive, mass), c.state);
  const double com_err = std::abs(c.modes.frequencies[0] - wz) / wz;
  const double gap_hz = (c.modes.frequencies[0] - c.modes.frequencies[1]) / two_pi;

  const PaperCrystal warm = paper_crystal(1.575e6);
  const ThermalExtent th = thermal_extent(warm.modes, 0.5e-3, two_pi / 0.9e-6, mass);
  std::size_t center = 0, edge = 0;
  for (std::size_t i = 0; i < warm.state.size(); ++i) {
    const double r = warm.state.positions[i].norm();
    if (r < warm.state.positions[center].norm()) center = i;
    if (r > warm.state.positions[edge].norm()) edge = i;
  }
  o.detail << "alpha " << fit.alpha << ", COM rel err " << com_err << ", gap " << gap_hz / 1e3 << " kHz, z_rms "
           << th.z_rms[center] * 1e9 << "/" << th.z_rms[edge] * 1e9 << " nm (77/72), DWF " << th.dwf[center] << "/"
           << th.dwf[edge] << " (0.86/0.88)";
  o.require(std::abs(fit.alpha - 0.05) <= 0.03, "alpha");
  o.require(com_err < 1e-9, "COM frequency");
  o.require(gap_hz > 20e3, "mode gap");
  o.require(within_rel(th.z_rms[center], 77e-9, 0.10), "z_rms center");
  o.require(within_rel(th.z_rms[edge], 72e-9, 0.10), "z_rms edge");
  o.require(std::abs(th.dwf[center] - 0.86) <= 0.02, "DWF center");
  o.require(std::abs(th.dwf[edge] - 0.88) <= 0.02, "DWF edge");
  return o;
}

Outcome criterion_collapse() {
  Outcome o;
  const double j = 1000.0;
  double worst = 0.0;
  const auto normalized = [&](std::size_t n, double x) {
    const SpinEnsembleParams p{n, j, 0.0, 0.0, 0.0, x * std::sqrt(double(n)) / (2.0 * j)};
    return contrast(p) / (0.5 * double(n));
  };
  for (int k = 0; k <= 150; ++k) {
    const double x = 0.01 * k;
    worst = std::max(worst, std::abs(normalized(100, x) - normalized(200, x)));
  }
  o.detail << "max |C100 - C200| = " << worst << " over x in [0, 1.5]";
  o.require(worst < 0.02, "collapse");
  return o;
}

Outcome criterion_squeezing() {
  Outcome o;
  const double xi0 = squeezing_parameter(fixtures::paper_params(0.0)).xi_r_squared;
  o.require(std::abs(xi0 - 1.0) < 1e-10, "xi^2 at tau = 0");

  // Log-log slope of the coherent optimum over N in [32, 1024].
  std::vector<double> lx, ly;
  for (double n = 32; n <= 1024; n *= std::sqrt(2.0)) {
    const SpinEnsembleParams p{static_cast<std::size_t>(std::lround(n)), 3300.0, 0.0, 0.0, 0.0, 0.0};
    lx.push_back(std::log(double(p.n_ions)));
    ly.push_back(std::log(optimal_squeezing(p).xi_r_squared));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  o.require(std::abs(slope + 2.0 / 3.0) <= 0.1, "N scaling exponent");

  // Gamma / J = 0.05 with the measured rate ratios.
  const double j = 3300.0;
  const double scale = 0.05 * j / (0.5 * (171.6 + 9.2 + 6.5));
  double min_gap = INFINITY;
  for (std::size_t n = 20; n <= 250; ++n) {
    const OptimalSqueezing coherent = optimal_squeezing({n, j, 0.0, 0.0, 0.0, 0.0});
    const OptimalSqueezing lossy = optimal_squeezing({n, j, 171.6 * scale, 9.2 * scale, 6.5 * scale, 0.0});
    min_gap = std::min(min_gap, lossy.xi_r_squared - coherent.xi_r_squared);
  }
  o.require(min_gap > 0.0, "decohered curve above coherent");
  o.detail << "xi^2(0) - 1 = " << xi0 - 1.0 << ", slope " << slope << " (-2/3), min gap " << min_gap;
  return o;
}

Outcome criterion_counting() {
  Outcome o;
  const auto t0 = Clock::now();
  const SpinEnsembleParams p = fixtures::paper_params(3e-3);
  const auto anti = MeasurementDirection::tomography(deg(88.0));
  const CountingDistribution d = counting_distribution(anti, p);
  const double elapsed = seconds_since(t0);

  double norm_err = std::abs(std::accumulate(d.probabilities.begin(), d.probabilities.end(), 0.0) - 1.0);
  const SpinMoments m = spin_moments(correlators_uniform(p), p.n_ions, anti);
  double moment_err = std::abs(d.variance() - m.variance) / m.variance;
  moment_err = std::max(moment_err, std::abs(d.mean() - m.mean) / std::max(1.0, std::abs(m.mean)));

  const auto& pr = d.probabilities;
  const std::size_t mid = 63;
  const double lo = *std::max_element(pr.begin(), pr.begin() + mid);
  const double hi = *std::max_element(pr.begin() + mid + 1, pr.end());
  const bool bimodal = lo > 2.0 * pr[mid] && hi > 2.0 * pr[mid];
  const double asymmetry = std::abs(lo - hi) / std::max(lo, hi);

  // Distribution change measured as total-variation distance, at both panels of the comparison.
  std::ostringstream bfield_detail;
  bool bfield_ok = true;
  for (double psi_deg : {88.0, 174.6}) {
    const auto dir = MeasurementDirection::tomography(deg(psi_deg));
    const CountingDistribution a = counting_distribution(dir, p);
    const CountingDistribution b = counting_distribution(dir, p, {.bfield_variance = fixtures::paper_dephasing});
    norm_err = std::max(norm_err, std::abs(std::accumulate(b.probabilities.begin(), b.probabilities.end(), 0.0) - 1.0));
    double tv = 0.0;
    for (std::size_t n = 0; n < a.probabilities.size(); ++n) tv += 0.5 * std::abs(a.probabilities[n] - b.probabilities[n]);
    bfield_detail << " " << psi_deg << " deg: " << tv * 100 << "%";
    bfield_ok = bfield_ok && tv < 0.01;
  }
  o.detail << "norm err " << norm_err << ", moment rel err " << moment_err << ", peaks " << lo << "/" << hi
           << " (asymmetry " << asymmetry << "), B-field TV change" << bfield_detail.str() << ", " << elapsed << " s";
  o.require(norm_err < 1e-10, "normalization");
  o.require(moment_err < 1e-8, "moments");
  o.require(bimodal, "bimodality");
  o.require(asymmetry > 1e-3, "Raman asymmetry");
  o.require(bfield_ok, "B-field suppression");
  o.require(elapsed < 120.0, "runtime >= 2 min");
  return o;
}

Outcome criterion_noise_budget() {
  Outcome o;
  const double ratio = shot_to_projection_ratio({15.0, 0.0});
  const double db = 10.0 * std::log10(ratio);
  const double spread = lattice_phase_spread(125e-6, deg(0.01), two_pi / 0.90e-6);
  const double f0 = 30e-24, delta = two_pi * 1e3, wz = two_pi * 1.6e6, t_pi = 60e-6, nbar = 12.0;
  const double mass = constants::be9_mass;
  const double eps_star = freq_error_threshold(f0, delta, t_pi, nbar, wz, mass);
  const double ratio_at_half = freq_error_dephasing_ratio(0.5, f0, delta, t_pi, nbar, wz, mass);
  const double dw_hz = axial_frequency_error(0.5, delta) / two_pi;
  o.detail << "2/K = " << ratio << " (" << db << " dB), spread " << spread << " rad, eps* = " << eps_star
           << " (ratio at 0.5: " << ratio_at_half << "), Delta omega_z(0.5) = 2 pi " << dw_hz << " Hz";
  o.require(sig2(ratio) == sig2(0.133), "shot/projection ratio");
  o.require(std::abs(db + 8.8) < 0.05 + 1e-12, "dB value");
  o.require(sig2(spread) == 0.15, "lattice spread");
  // Unit ratio requires eps < 0.5, and eps = 0.5 maps to 2 pi 80 Hz.
  o.require(eps_star < 0.5 && ratio_at_half > 1.0, "epsilon bound");
  o.require(sig2(dw_hz) == 80.0, "axial frequency error");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", criterion_oracle},
      {"Fisher reproduction", criterion_fisher},
      {"uniform-coupling validity", criterion_uniform_validity},
      {"crystal/coupling reproduction", criterion_crystal},
      {"depolarization collapse", criterion_collapse},
      {"squeezing behavior", criterion_squeezing},
      {"counting-statistics invariants", criterion_counting},
      {"noise-budget spot checks", criterion_noise_budget},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::printf("[%s] criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
