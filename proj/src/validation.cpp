#include "penning/validation.hpp"

#include <algorithm>
#include <cmath>

#include "penning/counting.hpp"
#include "penning/dynamics.hpp"
#include "penning/oracle.hpp"

namespace penning {

double OracleComparison::max() const { return std::max({correlators, contrast, moments, counting}); }

SpinEnsembleParams random_oracle_params(std::size_t n_ions, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coupling(-2e4, 2e4);
  std::uniform_real_distribution<double> rate(0.0, 300.0);
  std::uniform_real_distribution<double> time(0.0, 3e-3);
  SpinEnsembleParams p;
  p.n_ions = n_ions;
  p.j_bar = coupling(rng);
  p.gamma_el = rate(rng);
  p.gamma_ud = rate(rng);
  p.gamma_du = rate(rng);
  p.tau = time(rng);
  return p;
}

OracleComparison compare_with_oracle(const SpinEnsembleParams& params,
                                     const std::vector<MeasurementDirection>& dirs) {
  const DensityOperator rho = lindblad_propagate(params);
  const CorrelatorSet c = correlators_uniform(params);
  const std::size_t n = params.n_ions;
  OracleComparison out;

  const auto track = [](double& slot, double err) { slot = std::max(slot, err); };
  using O = SiteOperator;
  track(out.correlators, std::abs(oracle_expectation(rho, {O{0, SiteOp::plus}}) - c.s_plus));
  track(out.correlators, std::abs(oracle_expectation(rho, {O{n - 1, SiteOp::z}}) - c.s_z));
  if (n >= 2) {
    track(out.correlators, std::abs(oracle_expectation(rho, {O{0, SiteOp::plus}, O{n - 1, SiteOp::plus}}) - c.plus_plus));
    track(out.correlators,
          std::abs(oracle_expectation(rho, {O{0, SiteOp::plus}, O{n - 1, SiteOp::minus}}) - c.plus_minus));
    track(out.correlators, std::abs(oracle_expectation(rho, {O{n - 1, SiteOp::plus}, O{0, SiteOp::z}}) - c.plus_z));
    track(out.correlators, std::abs(oracle_expectation(rho, {O{0, SiteOp::z}, O{n - 1, SiteOp::z}}) - c.z_z));
    track(out.correlators,
          std::abs(oracle_expectation(rho, {O{0, SiteOp::minus}, O{n - 1, SiteOp::minus}}) - c.minus_minus()));
  }

  const SpinMoments sx = oracle_spin_moments(rho, {1.0, 0.0, 0.0});
  const SpinMoments sy = oracle_spin_moments(rho, {0.0, 1.0, 0.0});
  out.contrast = std::abs(std::hypot(sx.mean, sy.mean) - contrast(params));

  for (const auto& dir : dirs) {
    const SpinMoments a = spin_moments(c, n, dir);
    const SpinMoments b = oracle_spin_moments(rho, dir);
    track(out.moments, std::abs(a.mean - b.mean));
    track(out.moments, std::abs(a.variance - b.variance));
    const CountingDistribution pa = counting_distribution(dir, params, {0.0, 1, true});
    const CountingDistribution pb = oracle_counting(rho, dir);
    for (std::size_t k = 0; k <= n; ++k) track(out.counting, std::abs(pa.probabilities[k] - pb.probabilities[k]));
  }
  return out;
}

}  // namespace penning
