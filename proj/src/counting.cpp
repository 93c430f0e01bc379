#include "penning/counting.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "penning/dynamics.hpp"
#include "penning/errors.hpp"
#include "penning/parallel.hpp"

namespace penning {

namespace {

constexpr cplx I{0.0, 1.0};

cplx int_pow(cplx base, std::size_t exponent) {
  cplx result{1.0, 0.0};
  while (exponent > 0) {
    if (exponent & 1U) result *= base;
    base *= base;
    exponent >>= 1U;
  }
  return result;
}

// q-independent ingredients of C(q): Phi(dJ), Psi(dJ) and the field-noise
// factor for each d = n+ - n- in [-N, N], plus the Fourier nodes.
struct CharacteristicTables {
  std::size_t n = 0;
  std::vector<cplx> phi_d;
  std::vector<cplx> psi_d;
  std::vector<double> field_d;
  std::vector<cplx> nodes;   // exp(i 2 pi k / K)
  double half_decay = 0.0;   // e^{-Gamma t} / 2
};

CharacteristicTables make_tables(const SpinEnsembleParams& params, double bfield_variance) {
  CharacteristicTables tab;
  tab.n = params.n_ions;
  const auto n = static_cast<long>(params.n_ions);
  tab.phi_d.resize(static_cast<std::size_t>(2 * n + 1));
  tab.psi_d.resize(tab.phi_d.size());
  tab.field_d.resize(tab.phi_d.size());
  for (long d = -n; d <= n; ++d) {
    const auto idx = static_cast<std::size_t>(d + n);
    tab.phi_d[idx] = phi(static_cast<double>(d) * params.j_bar, params.tau, params);
    tab.psi_d[idx] = psi(static_cast<double>(d) * params.j_bar, params.tau, params);
    tab.field_d[idx] = std::exp(-0.5 * static_cast<double>(d * d) * bfield_variance);
  }
  const std::size_t k_nodes = 2 * params.n_ions + 1;
  tab.nodes.resize(k_nodes);
  for (std::size_t k = 0; k < k_nodes; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(k_nodes);
    tab.nodes[k] = {std::cos(angle), std::sin(angle)};
  }
  tab.half_decay = 0.5 * std::exp(-params.gamma_total() * params.tau);
  return tab;
}

// Summing the multinomial expansion over n_z at fixed (n+, n-) gives
//   C(q) = sum_{n+,n-} N! / (n+! n-! M!) x+^{n+} x-^{n-} y_d^M,  M = N - n+ - n-,
// with x+- = i sin(q) a+- e^{-Gamma t}/2 and y_d = cos(q) Phi_d + i sin(q) c_z Psi_d.
// The d = n+ - n- slice is the e^{i d phi} Fourier coefficient of
// (x+ e^{i phi} + x- e^{-i phi} + y_d)^N, read off exactly by a (2N+1)-point DFT.
cplx characteristic_from_tables(const CharacteristicTables& tab, const MeasurementDirection& dir, double q) {
  const cplx a_plus{dir.c_x, -dir.c_y};
  const cplx a_minus{dir.c_x, dir.c_y};
  const double s = std::sin(q);
  const double c = std::cos(q);
  const cplx x_plus = I * s * a_plus * tab.half_decay;
  const cplx x_minus = I * s * a_minus * tab.half_decay;
  const auto n = static_cast<long>(tab.n);
  const std::size_t k_nodes = tab.nodes.size();

  cplx total{0.0, 0.0};
  for (long d = -n; d <= n; ++d) {
    const auto idx = static_cast<std::size_t>(d + n);
    if (tab.field_d[idx] == 0.0) continue;
    const cplx y = c * tab.phi_d[idx] + I * s * dir.c_z * tab.psi_d[idx];
    cplx coeff{0.0, 0.0};
    for (std::size_t k = 0; k < k_nodes; ++k) {
      const cplx e = tab.nodes[k];
      const cplx g = int_pow(x_plus * e + x_minus * std::conj(e) + y, tab.n);
      // e^{-i d phi_k}
      const std::size_t back = static_cast<std::size_t>(((-d * static_cast<long>(k)) % static_cast<long>(k_nodes) +
                                                         static_cast<long>(k_nodes)) %
                                                        static_cast<long>(k_nodes));
      coeff += g * tab.nodes[back];
    }
    total += tab.field_d[idx] * coeff / static_cast<double>(k_nodes);
  }
  return total;
}

}  // namespace

double CountingDistribution::mean() const {
  const auto& w = weights();
  double m = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * s_value(i);
  return m;
}

double CountingDistribution::variance() const {
  const auto& w = weights();
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * (s_value(i) - m) * (s_value(i) - m);
  return v;
}

std::complex<double> characteristic_function(const MeasurementDirection& dir, double q,
                                             const SpinEnsembleParams& params, double bfield_variance) {
  validate(params);
  validate(dir);
  return characteristic_from_tables(make_tables(params, bfield_variance), dir, q);
}

double log_expansion_coefficient(std::size_t n_ions, std::size_t n, std::size_t n_plus, std::size_t n_minus) {
  if (n > n_ions || n_plus + n_minus > n) throw ConfigError("expansion indices out of range");
  const auto lf = [](std::size_t k) { return std::lgamma(static_cast<double>(k) + 1.0); };
  const std::size_t n_z = n - n_plus - n_minus;
  return lf(n_ions) - lf(n) - lf(n_ions - n) + lf(n) - lf(n_plus) - lf(n_minus) - lf(n_z);
}

std::complex<double> characteristic_function_expansion(const MeasurementDirection& dir, double q,
                                                       const SpinEnsembleParams& params, double bfield_variance) {
  validate(params);
  validate(dir);
  const std::size_t big_n = params.n_ions;
  const cplx a_plus{dir.c_x, -dir.c_y};
  const cplx a_minus{dir.c_x, dir.c_y};
  const cplx cosq{std::cos(q), 0.0};
  const cplx isinq = I * std::sin(q);
  cplx total{0.0, 0.0};
  for (std::size_t n = 0; n <= big_n; ++n) {
    const cplx outer = guarded_pow(cosq, static_cast<double>(big_n - n)) * guarded_pow(isinq, static_cast<double>(n));
    if (outer == cplx{0.0, 0.0}) continue;
    cplx inner{0.0, 0.0};
    for (std::size_t np = 0; np <= n; ++np) {
      for (std::size_t nm = 0; np + nm <= n; ++nm) {
        const std::size_t nz = n - np - nm;
        const double d = static_cast<double>(np) - static_cast<double>(nm);
        const cplx coef = std::exp(log_expansion_coefficient(big_n, n, np, nm)) *
                          guarded_pow(a_plus, static_cast<double>(np)) * guarded_pow(a_minus, static_cast<double>(nm)) *
                          guarded_pow(cplx{dir.c_z, 0.0}, static_cast<double>(nz));
        if (coef == cplx{0.0, 0.0}) continue;
        inner += coef * std::exp(-0.5 * d * d * bfield_variance) * correlator_uniform(np, nm, nz, params);
      }
    }
    total += outer * inner;
  }
  return total;
}

CountingDistribution counting_distribution(const MeasurementDirection& dir, const SpinEnsembleParams& params,
                                           const CountingOptions& options) {
  validate(params);
  validate(dir);
  const std::size_t n = params.n_ions;
  const std::size_t points = n + 1;
  const CharacteristicTables tab = make_tables(params, options.bfield_variance);

  std::vector<cplx> chi(points);
  parallel_for(points, options.threads, [&](std::size_t k) {
    const double q = std::numbers::pi * static_cast<double>(k) / static_cast<double>(points);
    chi[k] = characteristic_from_tables(tab, dir, q);
  });

  CountingDistribution out;
  out.n_ions = n;
  out.direction = dir;
  out.probabilities.resize(points);
  double total = 0.0;
  for (std::size_t m = 0; m < points; ++m) {
    cplx acc{0.0, 0.0};
    const long eigen = 2 * static_cast<long>(m) - static_cast<long>(n);
    for (std::size_t k = 0; k < points; ++k) {
      // exp(-i pi k (2m - N) / (N + 1)), argument reduced modulo 2 (N + 1).
      const long reduced = (static_cast<long>(k) * eigen) % (2 * static_cast<long>(points));
      const double angle = -std::numbers::pi * static_cast<double>(reduced) / static_cast<double>(points);
      acc += cplx{std::cos(angle), std::sin(angle)} * chi[k];
    }
    acc /= static_cast<double>(points);
    if (std::abs(acc.imag()) > 1e-10) {
      throw InvariantError("counting probability has imaginary part " + std::to_string(acc.imag()));
    }
    if (acc.real() < -1e-10) {
      throw InvariantError("counting probability is negative: " + std::to_string(acc.real()));
    }
    out.probabilities[m] = acc.real();
    total += acc.real();
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw InvariantError("counting distribution normalization off by " + std::to_string(total - 1.0));
  }

  if (options.check_moments) {
    const SpinMoments expected =
        spin_moments(correlators_uniform(params), n, dir, options.bfield_variance);
    const double mean = out.mean();
    const double var = out.variance();
    if (std::abs(mean - expected.mean) > 1e-8 * std::max(1.0, std::abs(expected.mean)) ||
        std::abs(var - expected.variance) > 1e-8 * std::max(1.0, std::abs(expected.variance))) {
      throw InvariantError("counting moments disagree with correlator moments");
    }
  }
  for (double& p : out.probabilities) p = std::max(p, 0.0);
  return out;
}

CountingDistribution convolve_shot_noise(const CountingDistribution& dist, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("shot-noise sigma must be >= 0");
  CountingDistribution out = dist;
  SampledDensity dens;
  dens.sigma = sigma;
  const std::size_t points = dist.probabilities.size();
  dens.s_values.resize(points);
  dens.weights.assign(points, 0.0);
  for (std::size_t m = 0; m < points; ++m) dens.s_values[m] = dist.s_value(m);
  if (sigma == 0.0) {
    dens.weights = dist.probabilities;
  } else {
    const double width = sigma * 0.5 * static_cast<double>(dist.n_ions);
    double total = 0.0;
    for (std::size_t m = 0; m < points; ++m) {
      double acc = 0.0;
      for (std::size_t k = 0; k < points; ++k) {
        const double u = (dens.s_values[m] - dens.s_values[k]) / width;
        acc += dist.probabilities[k] * std::exp(-0.5 * u * u);
      }
      dens.weights[m] = acc;
      total += acc;
    }
    for (double& w : dens.weights) w /= total;
  }
  out.continuous = std::move(dens);
  return out;
}

double dephasing_variance(double tau_seconds, const DephasingFit& fit) {
  if (!(tau_seconds >= 0.0) || !std::isfinite(tau_seconds)) throw ConfigError("tau must be >= 0");
  const double t = tau_seconds * 1e3;
  return fit.a_per_ms2 * t * t + fit.b_per_ms4 * t * t * t * t;
}

}  // namespace penning
