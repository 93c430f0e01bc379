#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "penning/errors.hpp"
#include "penning/oracle.hpp"
#include "penning/validation.hpp"

using namespace penning;

namespace {

double binomial_pmf(std::size_t n, std::size_t k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("initial state and invariants") {
    const DensityOperator rho = x_polarized_state(3);
    CHECK_NOTHROW(rho.check_invariants());
    CHECK(rho.purity() == doctest::Approx(1.0));
    CHECK_THROWS_AS(x_polarized_state(max_oracle_ions + 1), ConfigError);
  }

  TEST_CASE("free evolution leaves the state unchanged") {
    const SpinEnsembleParams p{4, 0.0, 0.0, 0.0, 0.0, 2e-3};
    const DensityOperator rho = lindblad_propagate(p);
    CHECK((rho.rho - x_polarized_state(4).rho).norm() < 1e-10);
  }

  TEST_CASE("single-spin coherence decays at Gamma") {
    const SpinEnsembleParams p{1, 0.0, 171.6, 9.2, 6.5, 3e-3};
    CHECK(p.gamma_total() == doctest::Approx(93.65));
    const DensityOperator rho = lindblad_propagate(p);
    const double expected = 0.5 * std::exp(-93.65 * 3e-3);
    CHECK(std::abs(std::abs(oracle_expectation(rho, {{0, SiteOp::plus}})) - expected) < 1e-9);
  }

  TEST_CASE("coherent contrast at 2 J t / N = pi") {
    const double j = 5000.0;
    const SpinEnsembleParams p{4, j, 0.0, 0.0, 0.0, std::numbers::pi * 4.0 / (2.0 * j)};
    const DensityOperator rho = lindblad_propagate(p);
    const double contrast = 4.0 * std::abs(oracle_expectation(rho, {{0, SiteOp::plus}}));
    CHECK(contrast == doctest::Approx(2.0 * std::pow(std::abs(std::cos(std::numbers::pi)), 3)).epsilon(1e-8));
    CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("invariants hold along a dissipative trajectory") {
    const SpinEnsembleParams p{3, 8000.0, 200.0, 100.0, 50.0, 0.0};
    const auto states = lindblad_trajectory(CouplingMatrix::uniform(3, 8000.0), p, {0.0, 1e-3, 2e-3, 3e-3});
    REQUIRE(states.size() == 4);
    for (const auto& s : states) {
      CHECK_NOTHROW(s.check_invariants());
      CHECK(s.purity() <= 1.0 + 1e-10);
    }
    CHECK(states.back().purity() < states.front().purity());
  }

  TEST_CASE("projective counting of simple states") {
    const DensityOperator rho = x_polarized_state(5);
    const CountingDistribution z = oracle_counting(rho, MeasurementDirection::tomography(0.0));
    for (std::size_t n = 0; n <= 5; ++n) CHECK(z.probabilities[n] == doctest::Approx(binomial_pmf(5, n)));
    const CountingDistribution x = oracle_counting(rho, {1.0, 0.0, 0.0});
    CHECK(x.probabilities[5] == doctest::Approx(1.0));
    for (std::size_t n = 0; n < 5; ++n) CHECK(std::abs(x.probabilities[n]) < 1e-12);
  }

  TEST_CASE("analytic solution agrees with the oracle") {
    std::mt19937_64 rng(99);
    for (std::size_t n = 2; n <= 4; ++n) {
      const SpinEnsembleParams p = random_oracle_params(n, rng);
      const OracleComparison c =
          compare_with_oracle(p, {MeasurementDirection::tomography(0.4), MeasurementDirection::rotated_tomography(2.0, 0.3)});
      CHECK(c.max() < 1e-6);
    }
  }

  TEST_CASE("seeded sampling") {
    CountingDistribution d;
    d.n_ions = 10;
    for (std::size_t k = 0; k <= 10; ++k) d.probabilities.push_back(binomial_pmf(10, k));
    const auto one = sample_distribution(d, 1, 7);
    CHECK(std::accumulate(one.begin(), one.end(), std::uint64_t{0}) == 1);
    CHECK(sample_distribution(d, 5000, 42) == sample_distribution(d, 5000, 42));
    CHECK(sample_distribution(d, 5000, 42, 1) != sample_distribution(d, 5000, 42, 2));
    const std::uint64_t trials = 1000000;
    const auto h = sample_distribution(d, trials, 3);
    double worst = 0.0;
    for (std::size_t k = 0; k <= 10; ++k) worst = std::max(worst, std::abs(double(h[k]) / trials - d.probabilities[k]));
    CHECK(worst < 5e-3);
    CHECK_THROWS_AS(sample_distribution(d, 0, 1), ConfigError);
  }
}
