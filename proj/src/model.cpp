#include "penning/model.hpp"

#include <cmath>
#include <string>

#include "penning/constants.hpp"
#include "penning/errors.hpp"

namespace penning {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
}

void require_non_negative(double v, const char* name) {
  require_finite(v, name);
  if (v < 0.0) throw ConfigError(std::string(name) + " must be >= 0");
}

}  // namespace

MeasurementDirection MeasurementDirection::tomography(double psi) {
  return {0.0, std::sin(psi), std::cos(psi)};
}

MeasurementDirection MeasurementDirection::rotated_tomography(double psi, double theta) {
  return {std::sin(theta) * std::cos(psi), std::sin(psi), std::cos(theta) * std::cos(psi)};
}

const SpinEnsembleParams& validate(const SpinEnsembleParams& params) {
  if (params.n_ions == 0) throw ConfigError("n_ions must be >= 1");
  require_finite(params.j_bar, "j_bar");
  require_non_negative(params.gamma_el, "gamma_el");
  require_non_negative(params.gamma_ud, "gamma_ud");
  require_non_negative(params.gamma_du, "gamma_du");
  require_non_negative(params.tau, "tau");
  return params;
}

const TrapConfig& validate(const TrapConfig& trap) {
  require_non_negative(trap.omega_z, "omega_z");
  require_non_negative(trap.omega_r, "omega_r");
  require_non_negative(trap.omega_c, "omega_c");
  require_non_negative(trap.omega_q, "omega_q");
  require_finite(trap.ion_mass, "ion_mass");
  require_finite(trap.ion_charge, "ion_charge");
  if (trap.ion_mass <= 0.0) throw ConfigError("ion_mass must be > 0");
  if (trap.ion_charge == 0.0) throw ConfigError("ion_charge must be nonzero");
  if (!(trap.radial_stiffness() > 0.0)) {
    throw ConfigError("no planar confinement: omega_r (omega_c - omega_r) - omega_z^2 / 2 <= 0");
  }
  return trap;
}

const DriveConfig& validate(const DriveConfig& drive) {
  require_finite(drive.f0, "f0");
  require_finite(drive.mu, "mu");
  require_non_negative(drive.delta_k, "delta_k");
  if (drive.f0 <= 0.0) throw ConfigError("f0 must be > 0");
  if (drive.mu <= 0.0) throw ConfigError("mu must be > 0");
  return drive;
}

const MeasurementDirection& validate(const MeasurementDirection& dir) {
  require_finite(dir.c_x, "c_x");
  require_finite(dir.c_y, "c_y");
  require_finite(dir.c_z, "c_z");
  const double norm2 = dir.c_x * dir.c_x + dir.c_y * dir.c_y + dir.c_z * dir.c_z;
  if (std::abs(norm2 - 1.0) > 1e-12) throw ConfigError("measurement direction is not a unit vector");
  return dir;
}

double convert_coupling(double j_over_h_hz) {
  require_finite(j_over_h_hz, "coupling");
  return constants::two_pi * j_over_h_hz;
}

double coupling_to_hz(double j_rad_per_s) {
  require_finite(j_rad_per_s, "coupling");
  return j_rad_per_s / constants::two_pi;
}

double cyclotron_frequency(double magnetic_field_tesla, double ion_mass, double ion_charge) {
  return std::abs(ion_charge) * magnetic_field_tesla / ion_mass;
}

double com_coupling(double f0, double ion_mass, double omega_z, double detuning) {
  if (detuning == 0.0) throw DomainError("COM coupling diverges at zero detuning");
  return f0 * f0 / (4.0 * constants::hbar * ion_mass * omega_z * detuning);
}

}  // namespace penning
