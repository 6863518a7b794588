#include "omcspin/thermometry.hpp"

#include <cmath>

#include "omcspin/errors.hpp"

namespace omcspin::thermo {

namespace {

// h f / (k_B T)
double reduced_energy(double omega_ghz, double temperature_k, const PhysicalConstants& c) {
  return c.h_over_kb() * omega_ghz * 1e9 / temperature_k;
}

void check_temperature(double t) {
  require_finite(t, "temperature");
  if (!(t > 0.0)) throw DomainError("temperature must be positive");
}

}  // namespace

SpinPopulations spin_steady_populations(const ThermalState& state, const PhysicalConstants& c) {
  check_temperature(state.temperature);
  require_finite(state.omega, "transition frequency");
  if (state.omega < 0.0) throw DomainError("transition frequency must be non-negative");
  const double x = reduced_energy(state.omega, state.temperature, c);
  SpinPopulations p;
  p.p_up = 1.0 / (std::exp(x) + 1.0);
  p.p_down = 1.0 - p.p_up;
  return p;
}

double temperature_from_saturation(double p_up_saturated, double omega_ghz, const PhysicalConstants& c) {
  require_finite(p_up_saturated, "saturation population");
  if (!(p_up_saturated > 0.0 && p_up_saturated < 0.5)) {
    throw DomainError("saturated up population must lie strictly between 0 and 0.5");
  }
  if (!(omega_ghz > 0.0)) throw DomainError("transition frequency must be positive");
  return c.h_over_kb() * omega_ghz * 1e9 / std::log(1.0 / p_up_saturated - 1.0);
}

double bose_occupancy(double omega_ghz, double temperature_k, const PhysicalConstants& c) {
  check_temperature(temperature_k);
  if (!(omega_ghz > 0.0)) throw DomainError("mode frequency must be positive");
  return 1.0 / std::expm1(reduced_energy(omega_ghz, temperature_k, c));
}

double orbital_ground_fraction(double delta_gs_ghz, double temperature_k, const PhysicalConstants& c) {
  check_temperature(temperature_k);
  if (!(delta_gs_ghz > 0.0)) throw DomainError("orbital splitting must be positive");
  return 1.0 / (1.0 + std::exp(-reduced_energy(delta_gs_ghz, temperature_k, c)));
}

double orbital_freeze_out_temperature(double delta_gs_ghz, double fraction, double tolerance_k,
                                      const PhysicalConstants& c) {
  if (!(fraction > 0.5 && fraction < 1.0)) throw DomainError("target fraction must lie in (0.5, 1)");
  if (!(tolerance_k > 0.0)) throw InvalidInputError("tolerance must be positive");
  double lo = 1e-6, hi = 1.0;
  while (orbital_ground_fraction(delta_gs_ghz, hi, c) > fraction) hi *= 2.0;
  while (hi - lo > tolerance_k) {
    const double mid = 0.5 * (lo + hi);
    if (orbital_ground_fraction(delta_gs_ghz, mid, c) > fraction) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace omcspin::thermo
