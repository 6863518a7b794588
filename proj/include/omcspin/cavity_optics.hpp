#pragma once

#include <string>
#include <vector>

#include "omcspin/fit_core.hpp"
#include "omcspin/series.hpp"

namespace omcspin::optics {

/// Single-sided optical cavity. omega_o in THz; loss rates in GHz.
/// The total loss rate is always kappa_e + kappa_i.
class OpticalCavity {
 public:
  OpticalCavity() = default;
  OpticalCavity(double omega_o_thz, double kappa_e_ghz, double kappa_i_ghz);
  static OpticalCavity from_total(double omega_o_thz, double kappa_total_ghz, double kappa_e_ghz);

  double omega_o() const { return omega_o_; }
  double kappa_e() const { return kappa_e_; }
  double kappa_i() const { return kappa_i_; }
  double kappa_total() const { return kappa_e_ + kappa_i_; }
  double quality_factor() const { return 1000.0 * omega_o_ / kappa_total(); }

 private:
  double omega_o_ = 406.7;
  double kappa_e_ = 4.0;
  double kappa_i_ = 11.0;
};

struct Emitter {
  double omega_a = 406.7;  // THz
  double gamma_o = 0.11;   // GHz
};

struct CoupledOpticalSystem {
  OpticalCavity cavity;
  Emitter emitter;
  double g_so = 0.0;  // GHz

  void validate() const;
};

enum class CouplingRegime { Under, Over };

CouplingRegime parse_coupling_regime(const std::string& text);
const char* to_string(CouplingRegime regime);

/// |r|^2 with r = 1 - kappa_e / (i dc + kappa/2 + g^2 / (i da + gamma/2)),
/// detunings dc, da in GHz from the probe frequency (THz).
double reflectance(const CoupledOpticalSystem& sys, double probe_thz);

Spectrum reflectance_spectrum(const CoupledOpticalSystem& sys, const std::vector<double>& probe_thz);

/// C_o = 4 g^2 / (kappa gamma). Throws DomainError on a zero denominator.
double optical_cooperativity(double g_so, double kappa_total, double gamma_o);

/// Steady-state intracavity photon number for input power in pW, probe
/// frequency in THz and laser-cavity detuning in GHz.
double intracavity_photon_number(double power_pw, double probe_thz, const OpticalCavity& cavity, double detuning_ghz);

/// Reflectance as a CurveModel of the probe detuning from a fixed reference
/// frequency (GHz). Parameters: g_so, kappa, kappa_e_fraction, gamma_o,
/// cavity_offset, emitter_offset (offsets in GHz from the reference).
class ReflectanceModel final : public CurveModel {
 public:
  std::vector<std::string> parameter_names() const override;
  double value(double detuning_ghz, std::span<const double> p) const override;
  void gradient(double detuning_ghz, std::span<const double> p, std::span<double> out) const override;
};

struct ReflectanceFitOptions {
  CouplingRegime regime = CouplingRegime::Under;
  bool fit_frequencies = true;  // also refine cavity and emitter frequencies
  LeastSquaresOptions solver{};
};

struct ReflectanceFit {
  CoupledOpticalSystem system;
  double sigma_g_so = 0.0;
  double sigma_kappa = 0.0;
  double sigma_kappa_e = 0.0;
  double sigma_gamma_o = 0.0;
  double cooperativity = 0.0;
  // Covariance over (g_so, kappa, kappa_e, gamma_o), row-major.
  std::vector<double> covariance;
  FitReport report;
};

/// Least-squares fit of a reflection spectrum (abscissa in THz). The regime
/// bounds kappa_e below (Under) or above (Over) kappa/2. Throws
/// FitFailureError on non-convergence or a flat spectrum.
ReflectanceFit fit_reflectance(const Spectrum& spectrum, const CoupledOpticalSystem& init,
                               const ReflectanceFitOptions& options = {});

}  // namespace omcspin::optics
