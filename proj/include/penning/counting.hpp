#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "penning/model.hpp"

// Full counting statistics of the collective spin along an arbitrary
// measurement direction, for uniform couplings.
//
// Outcome index n counts spins found along +direction, so the collective
// projection is S = n - N/2 and sum_i sigma^dir_i = 2n - N.

namespace penning {

struct SampledDensity {
  std::vector<double> s_values;
  std::vector<double> weights;  // sums to one on the sampled grid
  double sigma = 0.0;           // Gaussian width in units of S / (N/2)
};

struct CountingDistribution {
  std::size_t n_ions = 0;
  MeasurementDirection direction;
  std::vector<double> probabilities;  // index n = 0..N
  std::optional<SampledDensity> continuous;

  [[nodiscard]] double s_value(std::size_t n) const { return static_cast<double>(n) - 0.5 * static_cast<double>(n_ions); }
  // Shot-noise-convolved weights when present, else the discrete probabilities.
  [[nodiscard]] const std::vector<double>& weights() const {
    return continuous ? continuous->weights : probabilities;
  }
  [[nodiscard]] double mean() const;
  [[nodiscard]] double variance() const;
};

// C(q) = < exp(i q sum_j sigma^dir_j) >. A positive bfield_variance multiplies
// each correlator with n+ - n- = d by exp(-d^2 bfield_variance / 2).
//
// Evaluated as a sum over d of Fourier coefficients of bounded functions,
// which regroups the multinomial expansion without its cancellation.
std::complex<double> characteristic_function(const MeasurementDirection& dir, double q,
                                             const SpinEnsembleParams& params, double bfield_variance = 0.0);

// Literal term-by-term multinomial expansion, coefficients in log domain.
// Suffers catastrophic cancellation beyond a few tens of spins; kept as an
// independent reference for small N.
std::complex<double> characteristic_function_expansion(const MeasurementDirection& dir, double q,
                                                       const SpinEnsembleParams& params,
                                                       double bfield_variance = 0.0);

// One term (n, n+, n-) of the expansion above, excluding the correlator value:
// log |C(N,n) multinomial(n; n+, n-, nz)|. Finite for every admissible triple.
double log_expansion_coefficient(std::size_t n_ions, std::size_t n, std::size_t n_plus, std::size_t n_minus);

struct CountingOptions {
  double bfield_variance = 0.0;  // rad^2; zero disables field noise
  unsigned threads = 0;          // 0 = hardware concurrency
  bool check_moments = true;
};

// (N+1)-point inverse DFT of C at q_k = pi k / (N+1). Throws InvariantError if
// normalization, positivity, reality or moment consistency fail.
CountingDistribution counting_distribution(const MeasurementDirection& dir, const SpinEnsembleParams& params,
                                           const CountingOptions& options = {});

// Gaussian convolution with standard deviation sigma * N / 2 in S, sampled on
// the discrete support and normalized to unit sum.
CountingDistribution convolve_shot_noise(const CountingDistribution& dist, double sigma);

struct DephasingFit {
  double a_per_ms2 = 2.4e-3;  // rad^2 / ms^2
  double b_per_ms4 = 1.7e-4;  // rad^2 / ms^4
};

// Empirical spin-echo dephasing variance a tau^2 + b tau^4 with tau in ms.
double dephasing_variance(double tau_seconds, const DephasingFit& fit = {});

}  // namespace penning
