#pragma once

#include <numbers>

namespace catsim::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 exact / recommended values, SI units.
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double boltzmann = 1.380649e-23;     // J / K
inline constexpr double atomic_mass = 1.66053906660e-27;  // kg

// 85Rb atomic mass.
inline constexpr double rb85_mass = 84.911789738 * atomic_mass;

}  // namespace catsim::constants
