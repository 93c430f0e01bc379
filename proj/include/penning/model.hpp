#pragma once

#include <compare>
#include <cstddef>

// Physical parameter records shared by every module.
//
// Units: SI throughout, with hbar = 1 absorbed into couplings so that every
// "energy" is an angular frequency in rad/s. Conversion from the Hz values
// found in configuration files happens at the boundary (convert_coupling).

namespace penning {

struct SpinEnsembleParams {
  std::size_t n_ions = 1;
  double j_bar = 0.0;     // uniform Ising coupling, rad/s
  double gamma_el = 0.0;  // elastic (Rayleigh) rate, 1/s
  double gamma_ud = 0.0;  // up -> down Raman rate, 1/s
  double gamma_du = 0.0;  // down -> up Raman rate, 1/s
  double tau = 0.0;       // interaction time, s

  // Single-spin coherence decay rate (Gamma_el + Gamma_ud + Gamma_du) / 2.
  [[nodiscard]] double gamma_total() const { return 0.5 * (gamma_el + gamma_ud + gamma_du); }
  // Raman asymmetry (Gamma_ud - Gamma_du) / 4.
  [[nodiscard]] double gamma_asym() const { return 0.25 * (gamma_ud - gamma_du); }
  [[nodiscard]] double gamma_raman() const { return gamma_ud + gamma_du; }

  bool operator==(const SpinEnsembleParams&) const = default;
};

struct TrapConfig {
  double omega_z = 0.0;  // axial trap frequency, rad/s
  double omega_r = 0.0;  // crystal rotation frequency, rad/s
  double omega_c = 0.0;  // cyclotron frequency qB/M, rad/s
  double omega_q = 0.0;  // rotating-wall strength, rad/s
  double ion_mass = 0.0;    // kg
  double ion_charge = 0.0;  // C

  // Effective radial stiffness (per unit mass) in the rotating frame, rad^2/s^2.
  [[nodiscard]] double radial_stiffness() const {
    return omega_r * (omega_c - omega_r) - 0.5 * omega_z * omega_z;
  }

  bool operator==(const TrapConfig&) const = default;
};

struct DriveConfig {
  double f0 = 0.0;       // optical dipole force amplitude, N
  double mu = 0.0;       // beatnote, rad/s
  double delta_k = 0.0;  // lattice wavevector magnitude, rad/m

  bool operator==(const DriveConfig&) const = default;
};

// Unit vector of Pauli coefficients; the measured operator per spin is
// c_x sigma^x + c_y sigma^y + c_z sigma^z.
struct MeasurementDirection {
  double c_x = 0.0;
  double c_y = 0.0;
  double c_z = 1.0;

  // Tomography direction in the y-z plane: cos(psi) sigma^z + sin(psi) sigma^y.
  static MeasurementDirection tomography(double psi);
  // The tomography direction rotated about the y axis by theta.
  static MeasurementDirection rotated_tomography(double psi, double theta);

  bool operator==(const MeasurementDirection&) const = default;
};

// Each validate returns its argument unchanged or throws ConfigError.
const SpinEnsembleParams& validate(const SpinEnsembleParams& params);
const TrapConfig& validate(const TrapConfig& trap);
const DriveConfig& validate(const DriveConfig& drive);
const MeasurementDirection& validate(const MeasurementDirection& dir);

// J/h in Hz -> J in rad/s, and back.
double convert_coupling(double j_over_h_hz);
double coupling_to_hz(double j_rad_per_s);

// Cyclotron frequency qB/M in rad/s.
double cyclotron_frequency(double magnetic_field_tesla, double ion_mass, double ion_charge);

// Homogeneous COM-mediated coupling F0^2 / (4 hbar M omega_z delta), rad/s.
double com_coupling(double f0, double ion_mass, double omega_z, double detuning);

}  // namespace penning
