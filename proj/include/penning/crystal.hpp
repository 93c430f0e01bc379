#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "penning/model.hpp"

// Planar Coulomb crystal in the rotating frame of a Penning trap: equilibrium
// structure, axial (drumhead) modes, phonon-mediated Ising couplings, and
// thermal axial extents.
//
// Planar crystals have many nearly degenerate minima. Only mode statistics
// (frequencies, coupling distributions, fitted exponents) are stable across
// seeds; exact ion positions are not.

namespace penning {

struct CrystalState {
  std::vector<Eigen::Vector2d> positions;  // m, rotating frame
  double potential_energy = 0.0;           // J
  TrapConfig trap;
  double length_scale = 0.0;               // l0 = (k_e q^2 / (M beta))^(1/3), m
  double gradient_max_norm = 0.0;          // dimensionless, at the returned positions
  std::vector<double> energy_trace;        // dimensionless energy after each accepted step

  [[nodiscard]] std::size_t size() const { return positions.size(); }
  [[nodiscard]] double radius() const;
};

struct ModeSpectrum {
  std::vector<double> frequencies;  // rad/s, descending; frequencies[0] is the COM mode
  Eigen::MatrixXd eigenvectors;     // column m is b_m
  Eigen::MatrixXd stiffness;        // mass-scaled axial stiffness matrix, rad^2/s^2

  [[nodiscard]] std::size_t size() const { return frequencies.size(); }
};

struct CouplingMatrix {
  Eigen::MatrixXd j;              // rad/s, symmetric, zero diagonal
  double j_bar_effective = 0.0;   // mean off-diagonal value, rad/s

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(j.rows()); }
  static CouplingMatrix uniform(std::size_t n, double j_bar);
  static CouplingMatrix from_matrix(Eigen::MatrixXd j);
};

struct PowerLawFit {
  double prefactor = 0.0;  // rad/s at unit distance (1 m)
  double alpha = 0.0;
};

struct ThermalExtent {
  std::vector<double> z_rms;  // m
  std::vector<double> dwf;    // Debye-Waller factors
};

struct MinimizerOptions {
  double gradient_tolerance = 1e-9;  // max-norm, dimensionless units
  int max_iterations = 50000;
  double jitter = 0.02;              // fraction of the seed lattice spacing
  std::uint64_t jitter_seed = 0x5eed'c0de'2016ULL;
};

// Dimensionless planar potential and gradient (unit length l0, unit energy
// M beta l0^2). Coordinates packed as (x0, y0, x1, y1, ...). wall_ratio is
// omega_q^2 / beta.
double planar_energy(std::span<const double> coords, double wall_ratio);
Eigen::VectorXd planar_gradient(std::span<const double> coords, double wall_ratio);

// Triangular-lattice seed, ions taken in order of distance from the center.
std::vector<Eigen::Vector2d> triangular_seed(std::size_t n, double spacing);

CrystalState equilibrium_positions(const TrapConfig& trap, std::size_t n,
                                   std::optional<std::span<const Eigen::Vector2d>> seed_layout = {},
                                   const MinimizerOptions& options = {});

ModeSpectrum axial_modes(const CrystalState& crystal);

CouplingMatrix coupling_matrix(const ModeSpectrum& modes, const DriveConfig& drive, double ion_mass);

// Drive with f0 rescaled so that the mean off-diagonal coupling equals target_j_bar.
DriveConfig drive_for_mean_coupling(const ModeSpectrum& modes, DriveConfig drive, double ion_mass,
                                    double target_j_bar);

// Least-squares fit of log J_ij against log d_ij over all pairs: J = prefactor / d^alpha.
PowerLawFit power_law_fit(const CouplingMatrix& coupling, const CrystalState& crystal);
PowerLawFit power_law_fit(const CouplingMatrix& coupling, std::span<const Eigen::Vector2d> positions);

// Per-ion rms axial extent and Debye-Waller factor with nbar_m = k_B T / (hbar omega_m).
// temperature == 0 gives the zero-point extent.
ThermalExtent thermal_extent(const ModeSpectrum& modes, double temperature, double delta_k, double ion_mass);

}  // namespace penning
