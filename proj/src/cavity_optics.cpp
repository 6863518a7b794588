#include "omcspin/cavity_optics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "omcspin/constants.hpp"
#include "omcspin/errors.hpp"

namespace omcspin::optics {

using cd = std::complex<double>;

OpticalCavity::OpticalCavity(double omega_o_thz, double kappa_e_ghz, double kappa_i_ghz)
    : omega_o_(omega_o_thz), kappa_e_(kappa_e_ghz), kappa_i_(kappa_i_ghz) {
  require_finite(omega_o_, "cavity frequency");
  require_finite(kappa_e_, "kappa_e");
  require_finite(kappa_i_, "kappa_i");
  if (!(omega_o_ > 0.0)) throw InvalidInputError("cavity frequency must be positive");
  if (!(kappa_e_ > 0.0) || !(kappa_i_ > 0.0)) throw InvalidInputError("cavity loss rates must be positive");
}

OpticalCavity OpticalCavity::from_total(double omega_o_thz, double kappa_total_ghz, double kappa_e_ghz) {
  if (!(kappa_e_ghz < kappa_total_ghz)) throw InvalidInputError("kappa_e must be smaller than the total loss rate");
  return OpticalCavity(omega_o_thz, kappa_e_ghz, kappa_total_ghz - kappa_e_ghz);
}

void CoupledOpticalSystem::validate() const {
  require_finite(g_so, "g_so");
  require_finite(emitter.omega_a, "emitter frequency");
  require_finite(emitter.gamma_o, "gamma_o");
  if (g_so < 0.0) throw InvalidInputError("g_so must be non-negative");
  if (!(emitter.gamma_o > 0.0)) throw InvalidInputError("gamma_o must be positive");
}

CouplingRegime parse_coupling_regime(const std::string& text) {
  if (text == "under") return CouplingRegime::Under;
  if (text == "over") return CouplingRegime::Over;
  throw InvalidInputError("coupling regime must be 'under' or 'over', got '" + text + "'");
}

const char* to_string(CouplingRegime regime) { return regime == CouplingRegime::Under ? "under" : "over"; }

namespace {

cd reflection_amplitude(double g, double kappa, double kappa_e, double gamma, double dc, double da) {
  const cd emitter(gamma / 2.0, da);
  const cd denom = cd(kappa / 2.0, dc) + g * g / emitter;
  return 1.0 - kappa_e / denom;
}

}  // namespace

double reflectance(const CoupledOpticalSystem& sys, double probe_thz) {
  const double dc = (probe_thz - sys.cavity.omega_o()) * 1000.0;
  const double da = (probe_thz - sys.emitter.omega_a) * 1000.0;
  return std::norm(reflection_amplitude(sys.g_so, sys.cavity.kappa_total(), sys.cavity.kappa_e(),
                                        sys.emitter.gamma_o, dc, da));
}

Spectrum reflectance_spectrum(const CoupledOpticalSystem& sys, const std::vector<double>& probe_thz) {
  sys.validate();
  std::vector<double> r(probe_thz.size());
  std::transform(probe_thz.begin(), probe_thz.end(), r.begin(), [&](double f) { return reflectance(sys, f); });
  return Spectrum(probe_thz, std::move(r), std::nullopt, "THz", "reflectance");
}

double optical_cooperativity(double g_so, double kappa_total, double gamma_o) {
  require_finite(g_so, "g_so");
  require_finite(kappa_total, "kappa");
  require_finite(gamma_o, "gamma_o");
  const double denom = kappa_total * gamma_o;
  if (denom == 0.0) throw DomainError("cooperativity denominator kappa*gamma is zero");
  return 4.0 * g_so * g_so / denom;
}

double intracavity_photon_number(double power_pw, double probe_thz, const OpticalCavity& cavity, double detuning_ghz) {
  require_finite(power_pw, "power");
  require_finite(detuning_ghz, "detuning");
  if (power_pw < 0.0) throw InvalidInputError("power must be non-negative");
  if (!(probe_thz > 0.0)) throw InvalidInputError("probe frequency must be positive");
  const double omega = kTwoPi * probe_thz * kTHz;
  const double photon_flux = power_pw * 1e-12 / (kCodata.reduced_planck() * omega);
  const double kappa_e = kTwoPi * cavity.kappa_e() * kGHz;
  const double half_kappa = 0.5 * kTwoPi * cavity.kappa_total() * kGHz;
  const double delta = kTwoPi * detuning_ghz * kGHz;
  return kappa_e * photon_flux / (half_kappa * half_kappa + delta * delta);
}

// ---------------------------------------------------------------------------

std::vector<std::string> ReflectanceModel::parameter_names() const {
  return {"g_so", "kappa", "kappa_e_fraction", "gamma_o", "cavity_offset", "emitter_offset"};
}

double ReflectanceModel::value(double x, std::span<const double> p) const {
  return std::norm(reflection_amplitude(p[0], p[1], p[2] * p[1], p[3], x - p[4], x - p[5]));
}

void ReflectanceModel::gradient(double x, std::span<const double> p, std::span<double> out) const {
  const double g = p[0], kappa = p[1], eta = p[2], gamma = p[3];
  const double kappa_e = eta * kappa;
  const cd e(gamma / 2.0, x - p[5]);
  const cd d = cd(kappa / 2.0, x - p[4]) + g * g / e;
  const cd r = 1.0 - kappa_e / d;
  const cd rc = std::conj(r);
  const cd d2 = d * d;
  const cd e2 = e * e;

  // dr = -d(kappa_e)/D + kappa_e/D^2 dD
  auto dR = [&](double dkappa_e, cd dD) { return 2.0 * std::real(rc * (-dkappa_e / d + kappa_e / d2 * dD)); };
  out[0] = dR(0.0, 2.0 * g / e);
  out[1] = dR(eta, cd(0.5, 0.0));
  out[2] = dR(kappa, cd(0.0, 0.0));
  out[3] = dR(0.0, -0.5 * g * g / e2);
  out[4] = dR(0.0, cd(0.0, -1.0));
  out[5] = dR(0.0, cd(0.0, 1.0) * g * g / e2);
}

namespace {

// Reflectance restricted to a subset of the full parameter vector; the
// remaining entries stay at their initial values.
class MaskedModel final : public CurveModel {
 public:
  MaskedModel(std::vector<double> full, std::vector<std::size_t> free) : full_(std::move(full)), free_(std::move(free)) {}

  std::vector<std::string> parameter_names() const override {
    const auto all = base_.parameter_names();
    std::vector<std::string> names;
    for (auto k : free_) names.push_back(all[k]);
    return names;
  }
  double value(double x, std::span<const double> p) const override { return base_.value(x, expand(p)); }
  void gradient(double x, std::span<const double> p, std::span<double> out) const override {
    double g[6];
    base_.gradient(x, expand(p), g);
    for (std::size_t i = 0; i < free_.size(); ++i) out[i] = g[free_[i]];
  }
  std::vector<double> expand(std::span<const double> p) const {
    std::vector<double> full = full_;
    for (std::size_t i = 0; i < free_.size(); ++i) full[free_[i]] = p[i];
    return full;
  }

 private:
  ReflectanceModel base_;
  std::vector<double> full_;
  std::vector<std::size_t> free_;
};

}  // namespace

ReflectanceFit fit_reflectance(const Spectrum& spectrum, const CoupledOpticalSystem& init,
                               const ReflectanceFitOptions& options) {
  init.validate();
  if (spectrum.size() < 8) throw InvalidInputError("reflectance fit needs at least 8 points");
  const double reference = init.cavity.omega_o();
  std::vector<double> detuning(spectrum.size());
  const auto freq = spectrum.abscissa();
  for (std::size_t i = 0; i < freq.size(); ++i) detuning[i] = (freq[i] - reference) * 1000.0;
  if (detuning.back() - detuning.front() < init.cavity.kappa_total()) {
    throw InvalidInputError("reflectance spectrum must span at least one cavity linewidth");
  }
  const auto values = spectrum.values();
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (*mx - *mn <= 1e-12) throw FitFailureError("flat reflection spectrum", 0.0);

  const bool with_emitter = init.g_so > 0.0;
  const double kappa = init.cavity.kappa_total();
  double eta = init.cavity.kappa_e() / kappa;
  double eta_lo = 1e-9, eta_hi = 0.5;
  if (options.regime == CouplingRegime::Over) {
    eta_lo = 0.5;
    eta_hi = 1.0 - 1e-9;
  }
  if (!(eta > eta_lo && eta < eta_hi)) eta = options.regime == CouplingRegime::Under ? 0.25 : 0.75;

  const std::vector<double> full{init.g_so, kappa, eta, init.emitter.gamma_o, 0.0,
                                 (init.emitter.omega_a - reference) * 1000.0};
  std::vector<std::size_t> free{1, 2};
  if (with_emitter) {
    free = {0, 1, 2, 3};
  }
  if (options.fit_frequencies) {
    free.push_back(4);
    if (with_emitter) free.push_back(5);
  }

  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> lo_full{0.0, 1e-9, eta_lo, 1e-9, -inf, -inf};
  const std::vector<double> hi_full{inf, inf, eta_hi, inf, inf, inf};
  ParameterBounds bounds;
  std::vector<double> start;
  for (auto k : free) {
    bounds.lower.push_back(lo_full[k]);
    bounds.upper.push_back(hi_full[k]);
    start.push_back(full[k]);
  }

  MaskedModel model(full, free);
  FitReport report = least_squares(model, detuning, values, spectrum.sigma_span(), start, bounds, options.solver);
  if (!report.converged) {
    throw FitFailureError("reflectance fit did not converge (" + report.message + ")", report.residual_norm);
  }

  const auto p = model.expand(report.values);
  ReflectanceFit fit;
  const double kappa_fit = p[1];
  const double kappa_e_fit = p[2] * kappa_fit;
  fit.system.cavity = OpticalCavity(reference + p[4] / 1000.0, kappa_e_fit, kappa_fit - kappa_e_fit);
  fit.system.emitter = Emitter{reference + p[5] / 1000.0, p[3]};
  fit.system.g_so = p[0];
  fit.cooperativity = optical_cooperativity(fit.system.g_so, kappa_fit, fit.system.emitter.gamma_o);

  // Map the fitted covariance onto (g_so, kappa, kappa_e, gamma_o).
  const std::size_t nf = free.size();
  auto free_index = [&](std::size_t k) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < nf; ++i) {
      if (free[i] == k) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
  };
  // Rows: output quantity; columns: full-parameter derivative.
  const double jac[4][6] = {{1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0}, {0, p[2], kappa_fit, 0, 0, 0}, {0, 0, 0, 1, 0, 0}};
  fit.covariance.assign(16, 0.0);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        const auto fi = free_index(i);
        if (fi < 0 || jac[a][i] == 0.0) continue;
        for (std::size_t j = 0; j < 6; ++j) {
          const auto fj = free_index(j);
          if (fj < 0 || jac[b][j] == 0.0) continue;
          s += jac[a][i] * report.cov(static_cast<std::size_t>(fi), static_cast<std::size_t>(fj)) * jac[b][j];
        }
      }
      fit.covariance[static_cast<std::size_t>(a * 4 + b)] = s;
    }
  }
  fit.sigma_g_so = std::sqrt(std::max(fit.covariance[0], 0.0));
  fit.sigma_kappa = std::sqrt(std::max(fit.covariance[5], 0.0));
  fit.sigma_kappa_e = std::sqrt(std::max(fit.covariance[10], 0.0));
  fit.sigma_gamma_o = std::sqrt(std::max(fit.covariance[15], 0.0));
  fit.report = std::move(report);
  return fit;
}

}  // namespace omcspin::optics
