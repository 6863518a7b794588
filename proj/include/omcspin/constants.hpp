#pragma once

#include <numbers>

namespace omcspin {

/// CODATA 2018 exact SI values. Frequencies throughout the library are
/// ordinary (cycles per second); energies are always h*f.
struct PhysicalConstants {
  double planck = 6.62607015e-34;     // J s
  double boltzmann = 1.380649e-23;    // J / K

  double reduced_planck() const { return planck / (2.0 * std::numbers::pi); }
  // Kelvin per hertz: h / k_B.
  double h_over_kb() const { return planck / boltzmann; }
};

inline constexpr PhysicalConstants kCodata{};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kHz = 1.0;
inline constexpr double kKHz = 1e3;
inline constexpr double kMHz = 1e6;
inline constexpr double kGHz = 1e9;
inline constexpr double kTHz = 1e12;

}  // namespace omcspin
