#include "penning/noise_budget.hpp"

#include <cmath>
#include <numbers>

#include "penning/constants.hpp"
#include "penning/errors.hpp"

namespace penning {

namespace {

double coupling_strength_sq(double f0, double delta, double omega_z, double ion_mass) {
  if (delta == 0.0 || !std::isfinite(delta)) throw DomainError("dephasing estimate needs a nonzero detuning");
  const double z0 = zero_point_extent(omega_z, ion_mass);
  const double r = f0 * z0 / (constants::hbar * delta);
  return r * r;
}

}  // namespace

const DetectionConfig& validate(const DetectionConfig& detection) {
  if (!(detection.k_photons > 0.0) || !std::isfinite(detection.k_photons)) {
    throw ConfigError("k_photons must be > 0");
  }
  if (!(detection.classical_noise_fraction >= 0.0) || !std::isfinite(detection.classical_noise_fraction)) {
    throw ConfigError("classical_noise_fraction must be >= 0");
  }
  return detection;
}

double shot_noise_variance(std::size_t n_ions, const DetectionConfig& detection) {
  validate(detection);
  const double m = 0.5 * static_cast<double>(n_ions) * detection.k_photons;
  return m / (detection.k_photons * detection.k_photons);
}

double shot_to_projection_ratio(const DetectionConfig& detection) {
  validate(detection);
  return 2.0 / detection.k_photons;
}

double total_variance_model(double spin_variance, std::size_t n_ions, const DetectionConfig& detection) {
  return spin_variance + shot_noise_variance(n_ions, detection);
}

double bfield_variance(std::size_t n_ions, double tau_seconds, double psi, const DephasingFit& fit) {
  const double n = static_cast<double>(n_ions);
  const double s = std::sin(psi);
  return 0.25 * n * n * dephasing_variance(tau_seconds, fit) * s * s;
}

double zero_point_extent(double omega_z, double ion_mass) {
  if (!(omega_z > 0.0) || !(ion_mass > 0.0)) throw ConfigError("zero-point extent needs omega_z > 0 and mass > 0");
  return std::sqrt(constants::hbar / (2.0 * ion_mass * omega_z));
}

double heating_dephasing_ratio(double delta_n, double f0, double delta, double omega_z, double ion_mass) {
  if (!(delta_n >= 0.0)) throw ConfigError("delta_n must be >= 0");
  return delta_n * 8.0 * coupling_strength_sq(f0, delta, omega_z, ion_mass);
}

double freq_error_dephasing_ratio(double epsilon, double f0, double delta, double t_pi, double nbar, double omega_z,
                                  double ion_mass) {
  if (!(nbar >= 0.0)) throw ConfigError("nbar must be >= 0");
  const double arm = epsilon + delta * t_pi;
  return coupling_strength_sq(f0, delta, omega_z, ion_mass) * epsilon * epsilon * arm * arm * (2.0 * nbar + 1.0);
}

double freq_error_threshold(double f0, double delta, double t_pi, double nbar, double omega_z, double ion_mass,
                            double level) {
  if (!(level > 0.0)) throw ConfigError("threshold level must be > 0");
  // eps (eps + delta t_pi) = sqrt(level / (A (2 nbar + 1))), a quadratic in eps.
  const double a = coupling_strength_sq(f0, delta, omega_z, ion_mass) * (2.0 * nbar + 1.0);
  if (!(a > 0.0)) throw DomainError("frequency-error dephasing vanishes for every epsilon");
  const double target = std::sqrt(level / a);
  const double b = delta * t_pi;
  return 2.0 * target / (b + std::sqrt(b * b + 4.0 * target));
}

double axial_frequency_error(double epsilon, double delta) {
  return epsilon * delta / (2.0 * std::numbers::pi);
}

double lattice_phase_spread(double radius, double misalignment_angle, double delta_k) {
  return std::abs(delta_k) * radius * std::tan(misalignment_angle);
}

}  // namespace penning
