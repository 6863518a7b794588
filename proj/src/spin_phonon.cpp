#include "omcspin/spin_phonon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "omcspin/errors.hpp"

namespace omcspin::phonon {

void MechanicalMode::validate() const {
  require_finite(omega_q, "mode frequency");
  require_finite(q_factor, "mode quality factor");
  require_finite(g_q, "mode coupling");
  if (g_om) require_finite(*g_om, "optomechanical coupling");
  if (!(omega_q > 0.0)) throw InvalidInputError("mode frequency must be positive");
  if (!(q_factor > 0.0)) throw InvalidInputError("mode quality factor must be positive");
}

ModeTable::ModeTable(std::vector<MechanicalMode> modes) : modes_(std::move(modes)) {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    modes_[i].validate();
    if (i > 0 && !(modes_[i].omega_q > modes_[i - 1].omega_q)) {
      throw InvalidInputError("mode table frequencies must be strictly increasing (row " + std::to_string(i + 1) + ")");
    }
  }
}

ModeTable ModeTable::sorted(std::vector<MechanicalMode> modes) {
  std::stable_sort(modes.begin(), modes.end(),
                   [](const MechanicalMode& a, const MechanicalMode& b) { return a.omega_q < b.omega_q; });
  return ModeTable(std::move(modes));
}

double g_sm_from_strain(const siv::StrainProjection& projection, double b_perp_kg, const siv::SivParameters& params) {
  require_finite(b_perp_kg, "perpendicular field");
  if (b_perp_kg < 0.0) throw InvalidInputError("perpendicular field must be non-negative");
  if (params.lambda_so_gs == 0.0) throw DomainError("spin-orbit splitting is zero");
  const double ghz = 2.0 * params.gyro * b_perp_kg / params.lambda_so_gs * projection.magnitude();
  return ghz * 1000.0;
}

double g_sm_on_resonance(double omega_m_ghz, const siv::StrainProjection& projection, const siv::SivParameters& params) {
  require_finite(omega_m_ghz, "mode frequency");
  if (params.lambda_so_gs == 0.0) throw DomainError("spin-orbit splitting is zero");
  const double ghz = std::numbers::sqrt2 * omega_m_ghz / params.lambda_so_gs * projection.magnitude();
  return ghz * 1000.0;
}

double strain_quenching_factor(double delta_gs, double lambda_so) {
  require_finite(delta_gs, "orbital splitting");
  require_finite(lambda_so, "lambda_so");
  if (!(lambda_so > 0.0)) throw DomainError("spin-orbit splitting must be positive");
  if (delta_gs < lambda_so) throw DomainError("orbital splitting is smaller than the spin-orbit splitting");
  return lambda_so / delta_gs;
}

double purcell_rate(double g_sm_mhz, const MechanicalMode& mode, double omega_s_ghz, double gamma_baseline_khz) {
  mode.validate();
  const double g = g_sm_mhz * 1e6;
  const double kappa = mode.linewidth_mhz() * 1e6;
  const double detuning = (omega_s_ghz - mode.omega_q) * 1e9;
  const double enhancement_hz = g * g * kappa / (0.25 * kappa * kappa + detuning * detuning);
  return gamma_baseline_khz + enhancement_hz * 1e-3;
}

double infer_g_sm(double gamma_on_khz, double gamma_off_khz, double kappa_m_mhz) {
  require_finite(gamma_on_khz, "on-resonance rate");
  require_finite(gamma_off_khz, "off-resonance rate");
  require_finite(kappa_m_mhz, "mechanical linewidth");
  if (!(kappa_m_mhz > 0.0)) throw DomainError("mechanical linewidth must be positive");
  if (!(gamma_on_khz > gamma_off_khz)) throw DomainError("no Purcell enhancement to invert (gamma_on <= gamma_off)");
  const double excess_hz = (gamma_on_khz - gamma_off_khz) * 1e3;
  return std::sqrt(excess_hz * kappa_m_mhz * 1e6 / 4.0) * 1e-6;
}

double effective_quality_factor(double q_sim, double q_damp) {
  if (!(q_sim > 0.0) || !(q_damp > 0.0)) throw InvalidInputError("quality factors must be positive");
  return 1.0 / (1.0 / q_sim + 1.0 / q_damp);
}

Spectrum broadband_decay_spectrum(const ModeTable& modes, const std::vector<double>& grid_ghz,
                                  const DecaySpectrumOptions& options) {
  if (modes.empty()) throw InvalidInputError("mode table is empty");
  if (grid_ghz.empty()) throw InvalidInputError("frequency grid is empty");
  if (!(options.quench > 0.0 && options.quench <= 1.0)) throw InvalidInputError("quench factor must lie in (0, 1]");
  if (options.q_damp && !(*options.q_damp > 0.0)) throw InvalidInputError("damping Q must be positive");

  // Per mode: coupling and linewidth in Hz.
  std::vector<double> g2(modes.size()), kappa(modes.size()), center(modes.size());
  for (std::size_t q = 0; q < modes.size(); ++q) {
    const auto& m = modes.modes()[q];
    const double qf = options.q_damp ? effective_quality_factor(m.q_factor, *options.q_damp) : m.q_factor;
    const double g = options.quench * m.g_q * 1e6;
    g2[q] = g * g;
    kappa[q] = m.omega_q * 1e9 / qf;
    center[q] = m.omega_q * 1e9;
  }

  std::vector<double> gamma(grid_ghz.size());
  for (std::size_t i = 0; i < grid_ghz.size(); ++i) {
    const double w = grid_ghz[i] * 1e9;
    double sum = 0.0;
    for (std::size_t q = 0; q < g2.size(); ++q) {
      const double d = center[q] - w;
      sum += g2[q] * kappa[q] / (kappa[q] * kappa[q] + 4.0 * d * d);
    }
    gamma[i] = 4.0 * sum * 1e-3;
  }
  return Spectrum(grid_ghz, std::move(gamma), std::nullopt, "GHz", "kHz");
}

double angle_scaling(double theta_deg, double amplitude) {
  require_finite(theta_deg, "theta");
  if (amplitude < 0.0) throw InvalidInputError("angle amplitude must be non-negative");
  const double s = std::sin(theta_deg * std::numbers::pi / 180.0);
  return amplitude * s * s;
}

Cooperativities spin_mechanical_cooperativities(double g_sm_mhz, double kappa_m_mhz, const SpinQubit& qubit) {
  if (kappa_m_mhz == 0.0 || qubit.gamma_s_baseline == 0.0 || qubit.gamma_star == 0.0) {
    throw DomainError("cooperativity denominators must be non-zero");
  }
  const double g = g_sm_mhz * 1e6;
  const double kappa = kappa_m_mhz * 1e6;
  return {4.0 * g * g / (kappa * qubit.gamma_s_baseline * 1e3), 4.0 * g * g / (kappa * qubit.gamma_star * 1e6)};
}

}  // namespace omcspin::phonon
