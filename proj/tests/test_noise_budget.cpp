#include <cmath>
#include <numbers>

#include "doctest.h"
#include "penning/constants.hpp"
#include "penning/errors.hpp"
#include "penning/noise_budget.hpp"

using namespace penning;

namespace {

constexpr double two_pi = constants::two_pi;
const double f0 = 30e-24;
const double delta = two_pi * 1e3;
const double omega_z = two_pi * 1.6e6;
const double mass = constants::be9_mass;

}  // namespace

TEST_SUITE("noisebudget") {
  TEST_CASE("detection noise model") {
    const DetectionConfig k15{15.0, 0.0};
    CHECK(shot_to_projection_ratio(k15) == doctest::Approx(0.1333).epsilon(1e-3));
    CHECK(10.0 * std::log10(shot_to_projection_ratio(k15)) == doctest::Approx(-8.75).epsilon(0.01));
    CHECK(shot_noise_variance(100, {20.0, 0.0}) == doctest::Approx(2.5));
    CHECK(total_variance_model(7.0, 100, {20.0, 0.0}) == doctest::Approx(9.5));
    CHECK(total_variance_model(7.0, 100, {1e300, 0.0}) == doctest::Approx(7.0));
    // Classical detection noise is reported, not added.
    CHECK(total_variance_model(7.0, 100, {20.0, 0.5}) == doctest::Approx(9.5));
    CHECK_THROWS_AS(shot_noise_variance(10, {0.0, 0.0}), ConfigError);
  }

  TEST_CASE("B-field variance contribution") {
    CHECK(bfield_variance(124, 6e-3, 0.0) == 0.0);
    CHECK(bfield_variance(124, 6e-3, std::numbers::pi / 2) == doctest::Approx(1180.0).epsilon(0.005));
    CHECK(bfield_variance(200, 3e-3, 1.0) == doctest::Approx(4.0 * bfield_variance(100, 3e-3, 1.0)));
  }

  TEST_CASE("COM heating dephasing") {
    CHECK(heating_dephasing_ratio(0.0, f0, delta, omega_z, mass) == 0.0);
    const double z0 = zero_point_extent(omega_z, mass);
    const double scale = 2.0 * f0 * z0 / (constants::hbar * delta);
    CHECK(scale > 0.5);
    CHECK(scale < 2.0);
    CHECK(heating_dephasing_ratio(1.0, f0, delta, omega_z, mass) == doctest::Approx(2.0 * scale * scale));
    CHECK(heating_dephasing_ratio(0.1, f0, delta, omega_z, mass) < 1.0);
    CHECK_THROWS_AS(heating_dephasing_ratio(0.1, f0, 0.0, omega_z, mass), DomainError);
  }

  TEST_CASE("frequency error dephasing") {
    const double t_pi = 60e-6;
    CHECK(freq_error_dephasing_ratio(0.0, f0, delta, t_pi, 12.0, omega_z, mass) == 0.0);
    CHECK(freq_error_dephasing_ratio(0.3, f0, delta, t_pi, 12.0, omega_z, mass) <
          freq_error_dephasing_ratio(0.3, f0, delta, t_pi, 20.0, omega_z, mass));
    const double eps = freq_error_threshold(f0, delta, t_pi, 12.0, omega_z, mass);
    CHECK(freq_error_dephasing_ratio(eps, f0, delta, t_pi, 12.0, omega_z, mass) == doctest::Approx(1.0).epsilon(1e-9));
    // Staying below unit ratio needs eps below 0.5.
    CHECK(eps < 0.5);
    CHECK(freq_error_dephasing_ratio(0.5, f0, delta, t_pi, 12.0, omega_z, mass) > 1.0);
    CHECK(axial_frequency_error(0.5, delta) / two_pi == doctest::Approx(80.0).epsilon(0.01));
  }

  TEST_CASE("lattice phase spread") {
    const double dk = two_pi / 0.90e-6;
    const double tilt = 0.01 * std::numbers::pi / 180.0;
    CHECK(lattice_phase_spread(125e-6, 0.0, dk) == 0.0);
    CHECK(lattice_phase_spread(125e-6, tilt, dk) == doctest::Approx(0.15).epsilon(0.02));
    CHECK(lattice_phase_spread(250e-6, tilt, dk) == doctest::Approx(2.0 * lattice_phase_spread(125e-6, tilt, dk)));
  }
}
