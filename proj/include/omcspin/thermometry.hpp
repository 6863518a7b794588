#pragma once

#include "omcspin/constants.hpp"

namespace omcspin::thermo {

/// Temperature in K, transition frequency in GHz.
struct ThermalState {
  double temperature = 0.0;
  double omega = 0.0;
};

struct SpinPopulations {
  double p_up = 0.5;
  double p_down = 0.5;
};

/// Thermal spin populations, p_up = 1 / (exp(h f / k_B T) + 1).
SpinPopulations spin_steady_populations(const ThermalState& state, const PhysicalConstants& c = kCodata);

/// Inverse of spin_steady_populations for 0 < p_up < 0.5.
double temperature_from_saturation(double p_up_saturated, double omega_ghz, const PhysicalConstants& c = kCodata);

/// Bose-Einstein occupancy of a mode.
double bose_occupancy(double omega_ghz, double temperature_k, const PhysicalConstants& c = kCodata);

/// Population of the lower orbital branch for a two-level Boltzmann factor.
double orbital_ground_fraction(double delta_gs_ghz, double temperature_k, const PhysicalConstants& c = kCodata);

/// Temperature at which orbital_ground_fraction drops to `fraction`, found
/// by bisection to `tolerance_k`.
double orbital_freeze_out_temperature(double delta_gs_ghz, double fraction = 0.99, double tolerance_k = 1e-4,
                                      const PhysicalConstants& c = kCodata);

}  // namespace omcspin::thermo
