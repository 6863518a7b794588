#pragma once

#include <optional>
#include <string>
#include <vector>

#include "omcspin/series.hpp"
#include "omcspin/spin_phonon.hpp"

namespace omcspin::optomech {

/// Probe parked on the red (detuning -kappa/2) or blue (+kappa/2) sideband.
enum class Sideband { Red, Blue };

Sideband parse_sideband(const std::string& text);
const char* to_string(Sideband s);

struct SidebandPoint {
  double power_uw = 0.0;
  double linewidth_khz = 0.0;
  std::optional<double> sigma_khz;
};

struct SidebandSeries {
  Sideband sideband = Sideband::Red;
  std::vector<SidebandPoint> points;

  void validate() const;
};

struct IndependentSlopes {
  double kappa_intrinsic = 0.0;
  double slope_red = 0.0;   // kHz/uW, magnitude
  double slope_blue = 0.0;  // kHz/uW, magnitude
  double sigma_kappa = 0.0;
  double sigma_red = 0.0;
  double sigma_blue = 0.0;
};

struct BackactionFit {
  double kappa_intrinsic = 0.0;  // kHz
  double slope = 0.0;            // kHz/uW, shared magnitude
  double sigma_kappa = 0.0;
  double sigma_slope = 0.0;
  double cov_kappa_slope = 0.0;
  double reduced_chi2 = 0.0;
  std::optional<IndependentSlopes> independent;
};

struct BackactionLinewidth {
  double linewidth_khz = 0.0;  // clamped at zero
  bool lasing = false;
};

/// Lorentzian thermal-motion noise spectrum on a flat baseline; the grid is
/// in GHz and the FWHM equals the mode linewidth.
Spectrum thermal_npsd(const phonon::MechanicalMode& mode, double amplitude, double baseline,
                      const std::vector<double>& grid_ghz);

/// kappa0 + slope P on the red sideband, kappa0 - slope P on the blue one.
BackactionLinewidth backaction_linewidth(double power_uw, Sideband sideband, double kappa0_khz, double slope_khz_per_uw);

/// Joint weighted fit with a shared intercept and opposite-sign slopes of
/// equal magnitude. The fit with independent slopes is attached when both
/// series have at least two distinct powers.
BackactionFit fit_backaction_pair(const SidebandSeries& red, const SidebandSeries& blue);

/// P_th = kappa_intrinsic / slope, in uW.
double lasing_threshold_power(const BackactionFit& fit);

}  // namespace omcspin::optomech
