#pragma once

#include "penning/counting.hpp"

// Auxiliary noise and error-budget estimates for the spin-echo sequence.
// Dephasing ratios are relative to the projection-noise angle variance 1/N.

namespace penning {

struct DetectionConfig {
  double k_photons = 15.0;                // photons per bright ion per detection
  double classical_noise_fraction = 0.0;  // sigma_t^2 relative to photon shot noise; reported only
};

const DetectionConfig& validate(const DetectionConfig& detection);

// Photon shot-noise variance m / K^2 = N / (2K) for an equatorial state.
double shot_noise_variance(std::size_t n_ions, const DetectionConfig& detection);
// Shot noise relative to projection noise N/4, i.e. 2/K.
double shot_to_projection_ratio(const DetectionConfig& detection);
// (Delta S_psi)^2 = spin_variance + N / (2K). Classical detection noise is never added or subtracted.
double total_variance_model(double spin_variance, std::size_t n_ions, const DetectionConfig& detection);

// (N^2 / 4) Delta phi^2(tau) sin^2(psi).
double bfield_variance(std::size_t n_ions, double tau_seconds, double psi, const DephasingFit& fit = {});

// sqrt(hbar / (2 M omega_z)).
double zero_point_extent(double omega_z, double ion_mass);

// Delta n * 8 F0^2 z0^2 / (hbar^2 delta^2). Throws DomainError at delta = 0.
double heating_dephasing_ratio(double delta_n, double f0, double delta, double omega_z, double ion_mass);

// (F0 z0 / hbar delta)^2 eps^2 (eps + delta t_pi)^2 (2 nbar + 1).
double freq_error_dephasing_ratio(double epsilon, double f0, double delta, double t_pi, double nbar, double omega_z,
                                  double ion_mass);

// Smallest eps > 0 where the frequency-error ratio reaches `level` (default 1).
double freq_error_threshold(double f0, double delta, double t_pi, double nbar, double omega_z, double ion_mass,
                            double level = 1.0);

// Axial frequency error equivalent to eps: delta tau_s = 2 pi + eps with
// tau_s = 2 pi / delta gives Delta omega_z = eps delta / (2 pi), in rad/s.
double axial_frequency_error(double epsilon, double delta);

// |delta k| R tan(Delta theta), rad.
double lattice_phase_spread(double radius, double misalignment_angle, double delta_k);

}  // namespace penning
