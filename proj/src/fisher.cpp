#include "penning/fisher.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "penning/dynamics.hpp"
#include "penning/errors.hpp"
#include "penning/parallel.hpp"

namespace penning {

double hellinger_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ConfigError("Hellinger distance needs distributions on the same support");
  double sum_p = 0.0;
  double sum_q = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw ConfigError("Hellinger distance needs non-negative weights");
    sum_p += p[i];
    sum_q += q[i];
    const double diff = std::sqrt(p[i]) - std::sqrt(q[i]);
    acc += diff * diff;
  }
  if (std::abs(sum_p - 1.0) > 1e-8 || std::abs(sum_q - 1.0) > 1e-8) {
    throw ConfigError("Hellinger distance needs normalized distributions");
  }
  return 0.5 * acc;
}

double hellinger_distance(const CountingDistribution& p, const CountingDistribution& q) {
  if (p.n_ions != q.n_ions || p.continuous.has_value() != q.continuous.has_value()) {
    throw ConfigError("Hellinger distance needs distributions on the same support");
  }
  return hellinger_distance(p.weights(), q.weights());
}

CountingDistribution rotated_distribution(double psi_ref, double theta, const SpinEnsembleParams& params,
                                          const NoiseFlags& flags, unsigned threads) {
  CountingOptions options;
  options.bfield_variance = flags.bfield_variance;
  options.threads = threads;
  CountingDistribution dist =
      counting_distribution(MeasurementDirection::rotated_tomography(psi_ref, theta), params, options);
  if (flags.shot_sigma > 0.0) dist = convolve_shot_noise(dist, flags.shot_sigma);
  return dist;
}

std::vector<double> symmetric_theta_grid(double window, std::size_t points) {
  if (!(window > 0.0) || points < 2) throw ConfigError("theta grid needs a positive window and >= 2 points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = -window + 2.0 * window * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

HellingerScan hellinger_scan(const SpinEnsembleParams& params, double psi_ref, std::span<const double> thetas,
                             const NoiseFlags& flags, unsigned threads) {
  if (thetas.size() < 5) throw ConfigError("quartic Hellinger fit needs at least 5 angles");
  double window = 0.0;
  for (double t : thetas) window = std::max(window, std::abs(t));
  for (double t : thetas) {
    bool mirrored = false;
    for (double u : thetas) mirrored = mirrored || std::abs(t + u) <= 1e-12 * std::max(1.0, window);
    if (!mirrored) throw ConfigError("theta grid must be symmetric about zero");
  }

  const CountingDistribution reference = rotated_distribution(psi_ref, 0.0, params, flags, threads);
  HellingerScan scan;
  scan.thetas.assign(thetas.begin(), thetas.end());
  scan.distances.resize(thetas.size());
  scan.psi_ref = psi_ref;
  scan.fit_window = window;
  // Angles run serially; each distribution already spreads its q-points.
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    scan.distances[i] = thetas[i] == 0.0
                            ? 0.0
                            : hellinger_distance(reference, rotated_distribution(psi_ref, thetas[i], params, flags,
                                                                                 threads));
  }

  Eigen::MatrixXd design(thetas.size(), 2);
  Eigen::VectorXd rhs(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double t2 = thetas[i] * thetas[i];
    design(static_cast<Eigen::Index>(i), 0) = t2;
    design(static_cast<Eigen::Index>(i), 1) = t2 * t2;
    rhs(static_cast<Eigen::Index>(i)) = scan.distances[i];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  if (!coef.allFinite()) throw DomainError("Hellinger fit is ill-conditioned");
  scan.c2 = coef(0);
  scan.c4 = coef(1);
  scan.fit_f_over_n = 8.0 * scan.c2 / static_cast<double>(params.n_ions);
  scan.max_residual = (design * coef - rhs).cwiseAbs().maxCoeff();
  return scan;
}

HellingerScan fisher_information(const SpinEnsembleParams& params, const NoiseFlags& flags,
                                 const FisherOptions& options) {
  validate(params);
  const double psi_ref = options.psi_ref ? *options.psi_ref : squeezing_parameter(params, flags.bfield_variance).psi_min;
  double window = options.window;
  if (window <= 0.0) {
    if (!(options.max_window > 0.0) || !(options.edge_distance > 0.0) || options.edge_distance >= 1.0) {
      throw ConfigError("adaptive Hellinger window needs max_window > 0 and 0 < edge_distance < 1");
    }
    const CountingDistribution reference = rotated_distribution(psi_ref, 0.0, params, flags, options.threads);
    window = options.max_window;
    for (int iter = 0; iter < 20; ++iter) {
      const double edge =
          hellinger_distance(reference, rotated_distribution(psi_ref, window, params, flags, options.threads));
      if (edge <= options.edge_distance) break;
      // d ~ c2 theta^2; the 0.9 keeps the update from stalling where d saturates.
      window *= 0.9 * std::sqrt(options.edge_distance / edge);
    }
  }
  const std::vector<double> grid = symmetric_theta_grid(window, options.points);
  return hellinger_scan(params, psi_ref, grid, flags, options.threads);
}

}  // namespace penning
