#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "omcspin/series.hpp"
#include "omcspin/siv_model.hpp"

namespace omcspin::phonon {

/// Acoustic mode. Frequency in GHz, couplings in MHz. The linewidth is
/// derived from Q and never stored.
struct MechanicalMode {
  double omega_q = 0.0;
  double q_factor = 1.0;
  double g_q = 0.0;
  std::optional<double> g_om;

  void validate() const;
  double linewidth_khz() const { return 1000.0 * omega_q / q_factor * 1000.0; }
  double linewidth_mhz() const { return 1000.0 * omega_q / q_factor; }
};

/// Modes with strictly increasing frequency.
class ModeTable {
 public:
  ModeTable() = default;
  explicit ModeTable(std::vector<MechanicalMode> modes);
  // Sorts by frequency first; duplicate frequencies are still rejected.
  static ModeTable sorted(std::vector<MechanicalMode> modes);

  const std::vector<MechanicalMode>& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }

 private:
  std::vector<MechanicalMode> modes_;
};

/// omega_s in GHz, baseline relaxation in kHz, dephasing in MHz.
struct SpinQubit {
  double omega_s = 0.0;
  double gamma_s_baseline = 0.0;
  double gamma_star = 0.0;
};

// (2 gyro B_perp / lambda_so) sqrt(beta^2 + gamma^2); returns MHz.
double g_sm_from_strain(const siv::StrainProjection& projection, double b_perp_kg, const siv::SivParameters& params);

/// Coupling at the ~55 degree field orientation where gyro * B_X equals
/// omega_s / sqrt(2), evaluated on resonance (omega_s = omega_m). MHz.
double g_sm_on_resonance(double omega_m_ghz, const siv::StrainProjection& projection, const siv::SivParameters& params);

// lambda_so / delta_gs
double strain_quenching_factor(double delta_gs, double lambda_so);

/// Purcell-enhanced spin decay rate in kHz:
///   gamma_baseline + g^2 kappa_m / (kappa_m^2/4 + (omega_s - omega_m)^2)
/// Valid for kappa_m >> gamma_s (not checked).
double purcell_rate(double g_sm_mhz, const MechanicalMode& mode, double omega_s_ghz, double gamma_baseline_khz);

/// Inverse of purcell_rate on resonance; MHz.
double infer_g_sm(double gamma_on_khz, double gamma_off_khz, double kappa_m_mhz);

// (q_sim^-1 + q_damp^-1)^-1
double effective_quality_factor(double q_sim, double q_damp);

struct DecaySpectrumOptions {
  double quench = 1.0;
  std::optional<double> q_damp;
};

/// Gamma(w) = 4 sum_q (quench g_q)^2 k_q / (k_q^2 + 4 (w_q - w)^2), in kHz
/// over a grid in GHz.
Spectrum broadband_decay_spectrum(const ModeTable& modes, const std::vector<double>& grid_ghz,
                                  const DecaySpectrumOptions& options = {});

// amplitude sin^2(theta), theta in degrees
double angle_scaling(double theta_deg, double amplitude);

struct Cooperativities {
  double c_t1 = 0.0;
  double c_t2_star = 0.0;
};

Cooperativities spin_mechanical_cooperativities(double g_sm_mhz, double kappa_m_mhz, const SpinQubit& qubit);

}  // namespace omcspin::phonon
