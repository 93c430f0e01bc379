#pragma once

#include <optional>
#include <span>
#include <vector>

#include "penning/counting.hpp"
#include "penning/model.hpp"

// Fisher information per particle from the curvature of the squared Hellinger
// distance between counting distributions rotated about the y axis.

namespace penning {

struct NoiseFlags {
  double bfield_variance = 0.0;  // rad^2, homogeneous field dephasing
  double shot_sigma = 0.0;       // detection noise width in units of S / (N/2)
};

// (1/2) sum (sqrt p - sqrt q)^2. Throws ConfigError on size mismatch or
// unnormalized inputs.
double hellinger_distance(std::span<const double> p, std::span<const double> q);
double hellinger_distance(const CountingDistribution& p, const CountingDistribution& q);

// Counting statistics along (sin th cos psi, sin psi, cos th cos psi), with the
// noise treatment of flags. Shot noise populates dist.continuous.
CountingDistribution rotated_distribution(double psi_ref, double theta, const SpinEnsembleParams& params,
                                          const NoiseFlags& flags = {}, unsigned threads = 0);

struct HellingerScan {
  std::vector<double> thetas;
  std::vector<double> distances;
  double c2 = 0.0;
  double c4 = 0.0;
  double fit_f_over_n = 0.0;
  double fit_window = 0.0;
  double psi_ref = 0.0;
  double max_residual = 0.0;  // max |d - fit| over the grid
};

// `points` symmetric angles spanning [-window, window].
std::vector<double> symmetric_theta_grid(double window, std::size_t points = 13);

// Least-squares d = c2 th^2 + c4 th^4 over the given grid; F/N = 8 c2 / N.
// Throws ConfigError for fewer than 5 points or a grid not symmetric about 0.
HellingerScan hellinger_scan(const SpinEnsembleParams& params, double psi_ref, std::span<const double> thetas,
                             const NoiseFlags& flags = {}, unsigned threads = 0);

struct FisherOptions {
  std::optional<double> psi_ref;  // default: squeezing-optimal angle
  double window = 0.0;            // rad; 0 selects the window adaptively
  std::size_t points = 13;
  double max_window = 0.12;
  double edge_distance = 0.1;    // adaptive target for d_H^2 at the window edge
  unsigned threads = 0;
};

// The adaptive window starts at max_window and shrinks until the edge
// distance is at most edge_distance, keeping the fit in the quadratic regime.
HellingerScan fisher_information(const SpinEnsembleParams& params, const NoiseFlags& flags = {},
                                 const FisherOptions& options = {});

}  // namespace penning
