#include "omcspin/optomechanics.hpp"

#include <algorithm>
#include <cmath>

#include "omcspin/errors.hpp"
#include "omcspin/fit_core.hpp"

namespace omcspin::optomech {

Sideband parse_sideband(const std::string& text) {
  if (text == "red") return Sideband::Red;
  if (text == "blue") return Sideband::Blue;
  throw InvalidInputError("sideband must be 'red' or 'blue', got '" + text + "'");
}

const char* to_string(Sideband s) { return s == Sideband::Red ? "red" : "blue"; }

void SidebandSeries::validate() const {
  if (points.size() < 2) throw InvalidInputError(std::string(to_string(sideband)) + " series needs at least 2 points");
  for (const auto& p : points) {
    require_finite(p.power_uw, "power");
    require_finite(p.linewidth_khz, "linewidth");
    if (p.power_uw < 0.0) throw InvalidInputError("powers must be non-negative");
    if (p.sigma_khz && !(*p.sigma_khz > 0.0)) throw InvalidInputError("linewidth sigma must be positive");
  }
}

Spectrum thermal_npsd(const phonon::MechanicalMode& mode, double amplitude, double baseline,
                      const std::vector<double>& grid_ghz) {
  mode.validate();
  const double half = 0.5 * mode.omega_q / mode.q_factor;
  std::vector<double> v(grid_ghz.size());
  for (std::size_t i = 0; i < grid_ghz.size(); ++i) {
    const double d = grid_ghz[i] - mode.omega_q;
    v[i] = baseline + amplitude * half * half / (d * d + half * half);
  }
  return Spectrum(grid_ghz, std::move(v), std::nullopt, "GHz", "arb");
}

BackactionLinewidth backaction_linewidth(double power_uw, Sideband sideband, double kappa0_khz, double slope_khz_per_uw) {
  if (slope_khz_per_uw < 0.0) throw InvalidInputError("backaction slope must be non-negative");
  const double sign = sideband == Sideband::Red ? 1.0 : -1.0;
  const double value = kappa0_khz + sign * slope_khz_per_uw * power_uw;
  return {std::max(value, 0.0), value <= 0.0};
}

namespace {

struct Stacked {
  std::vector<std::vector<double>> shared;
  std::vector<std::vector<double>> independent;
  std::vector<double> y;
  std::vector<double> sigma;
  bool all_sigma = true;
};

Stacked stack(const SidebandSeries& red, const SidebandSeries& blue) {
  Stacked s;
  for (const auto* series : {&red, &blue}) {
    const bool is_red = series->sideband == Sideband::Red;
    for (const auto& p : series->points) {
      s.shared.push_back({1.0, is_red ? p.power_uw : -p.power_uw});
      s.independent.push_back({1.0, is_red ? p.power_uw : 0.0, is_red ? 0.0 : -p.power_uw});
      s.y.push_back(p.linewidth_khz);
      if (p.sigma_khz) {
        s.sigma.push_back(*p.sigma_khz);
      } else {
        s.all_sigma = false;
      }
    }
  }
  return s;
}

bool distinct_powers(const SidebandSeries& s) {
  const auto [mn, mx] = std::minmax_element(s.points.begin(), s.points.end(),
                                            [](const auto& a, const auto& b) { return a.power_uw < b.power_uw; });
  return mx->power_uw > mn->power_uw;
}

}  // namespace

BackactionFit fit_backaction_pair(const SidebandSeries& red, const SidebandSeries& blue) {
  if (red.sideband != Sideband::Red || blue.sideband != Sideband::Blue) {
    throw InvalidInputError("fit_backaction_pair expects a red and a blue series");
  }
  red.validate();
  blue.validate();
  const Stacked s = stack(red, blue);
  std::optional<std::span<const double>> sigma;
  if (s.all_sigma) sigma = std::span<const double>(s.sigma);

  const LinearFit shared = weighted_linear_fit(s.shared, s.y, sigma);
  BackactionFit fit;
  fit.kappa_intrinsic = shared.coefficients[0];
  fit.slope = shared.coefficients[1];
  fit.sigma_kappa = shared.sigma(0);
  fit.sigma_slope = shared.sigma(1);
  fit.cov_kappa_slope = shared.covariance[1];
  fit.reduced_chi2 = shared.reduced_chi2;

  if (distinct_powers(red) && distinct_powers(blue) && s.y.size() > 3) {
    const LinearFit ind = weighted_linear_fit(s.independent, s.y, sigma);
    fit.independent = IndependentSlopes{ind.coefficients[0], ind.coefficients[1], ind.coefficients[2],
                                        ind.sigma(0), ind.sigma(1), ind.sigma(2)};
  }
  return fit;
}

double lasing_threshold_power(const BackactionFit& fit) {
  if (fit.slope == 0.0) throw DomainError("zero backaction slope: no lasing threshold");
  if (fit.slope < 0.0) throw DomainError("backaction slope must be positive");
  return fit.kappa_intrinsic / fit.slope;
}

}  // namespace omcspin::optomech
