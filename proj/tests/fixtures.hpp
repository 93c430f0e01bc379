#pragma once

#include "penning/constants.hpp"
#include "penning/model.hpp"

// Parameter points shared by unit and acceptance tests.
namespace fixtures {

// N = 127 trap: B = 4.45 T, omega_z = 2 pi 1.58 MHz, omega_r = 2 pi 180 kHz, omega_q = 2 pi 28 kHz.
inline penning::TrapConfig paper_trap(double axial_hz = 1.58e6) {
  using namespace penning;
  TrapConfig t;
  t.ion_mass = constants::be9_mass;
  t.ion_charge = constants::elementary_charge;
  t.omega_z = constants::two_pi * axial_hz;
  t.omega_r = constants::two_pi * 180e3;
  t.omega_c = cyclotron_frequency(4.45, t.ion_mass, t.ion_charge);
  t.omega_q = constants::two_pi * 28e3;
  return t;
}

// The reported "J/h = 3.30 kHz" state: reproduced with J_bar = 3300 s^-1.
inline constexpr double paper_j_bar = 3300.0;

inline penning::SpinEnsembleParams paper_params(double tau = 3e-3) {
  return {127, paper_j_bar, 171.6, 9.2, 6.5, tau};
}

inline constexpr double paper_dephasing = 0.035;  // rad^2 at tau = 3 ms

}  // namespace fixtures
