#pragma once

#include <numbers>

namespace opo::constants {

inline constexpr double speed_of_light = 299'792'458.0;   // m/s
inline constexpr double planck = 6.626'070'15e-34;        // J s
inline constexpr double pi = std::numbers::pi;

} // namespace opo::constants
