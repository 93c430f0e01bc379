#pragma once

#include <numbers>

namespace penning::constants {

// CODATA 2018 exact / recommended values, SI.
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double planck = 6.62607015e-34;        // J s
inline constexpr double boltzmann = 1.380649e-23;       // J / K
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double coulomb_k = 8.9875517923e9;     // N m^2 / C^2
inline constexpr double atomic_mass = 1.66053906660e-27;  // kg

inline constexpr double be9_mass = 9.0121831 * atomic_mass;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace penning::constants
