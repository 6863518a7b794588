#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omcspin/series.hpp"

namespace omcspin {

/// A scalar model y = f(x; p) with an analytic parameter gradient.
class CurveModel {
 public:
  virtual ~CurveModel() = default;

  virtual std::vector<std::string> parameter_names() const = 0;
  virtual double value(double x, std::span<const double> params) const = 0;
  virtual void gradient(double x, std::span<const double> params, std::span<double> out) const = 0;

  std::size_t parameter_count() const { return parameter_names().size(); }
};

/// Adapts callables to CurveModel. Without a gradient callable the gradient
/// is taken by central differences.
class FunctionModel final : public CurveModel {
 public:
  using ValueFn = std::function<double(double, std::span<const double>)>;
  using GradientFn = std::function<void(double, std::span<const double>, std::span<double>)>;

  FunctionModel(std::vector<std::string> names, ValueFn value, GradientFn gradient = {});

  std::vector<std::string> parameter_names() const override { return names_; }
  double value(double x, std::span<const double> params) const override { return value_(x, params); }
  void gradient(double x, std::span<const double> params, std::span<double> out) const override;

 private:
  std::vector<std::string> names_;
  ValueFn value_;
  GradientFn gradient_;
};

/// Lorentzian peak on a constant baseline:
///   baseline + amplitude (fwhm/2)^2 / ((x - center)^2 + (fwhm/2)^2)
/// Parameters: center, fwhm, amplitude, baseline.
class LorentzianModel final : public CurveModel {
 public:
  std::vector<std::string> parameter_names() const override;
  double value(double x, std::span<const double> p) const override;
  void gradient(double x, std::span<const double> p, std::span<double> out) const override;
};

/// p(tau) = p_inf + amplitude exp(-gamma tau), gamma in kHz and tau in us.
/// Parameters: gamma_khz, p_inf, amplitude.
class ExponentialDecayModel final : public CurveModel {
 public:
  std::vector<std::string> parameter_names() const override;
  double value(double tau_us, std::span<const double> p) const override;
  void gradient(double tau_us, std::span<const double> p, std::span<double> out) const override;
};

/// amplitude sin^2(theta), theta in degrees. Parameter: amplitude.
class SinSquaredModel final : public CurveModel {
 public:
  std::vector<std::string> parameter_names() const override;
  double value(double theta_deg, std::span<const double> p) const override;
  void gradient(double theta_deg, std::span<const double> p, std::span<double> out) const override;
};

struct ParameterBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct LeastSquaresOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;      // relative parameter step
  double gradient_tolerance = 1e-12;  // infinity norm of J^T r
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
};

struct FitReport {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> sigmas;
  std::vector<double> covariance;  // row-major, names.size() squared
  double residual_norm = 0.0;      // sqrt of the (weighted) sum of squares
  double reduced_chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
  std::string message;

  std::size_t index_of(std::string_view name) const;
  double value(std::string_view name) const { return values[index_of(name)]; }
  double sigma(std::string_view name) const { return sigmas[index_of(name)]; }
  double cov(std::size_t i, std::size_t j) const { return covariance[i * names.size() + j]; }
};

/// Damped Gauss-Newton (Levenberg-Marquardt) minimisation of
/// sum ((f(x_i; p) - y_i) / sigma_i)^2 with optional box bounds enforced by
/// projection. Damping is multiplied by 10 on a rejected step and divided by
/// 10 on an accepted one. Stops when the relative step falls below
/// step_tolerance, the gradient below gradient_tolerance, or after
/// max_iterations (reported as not converged). Uncertainties come from the
/// inverse curvature, scaled by the reduced chi^2 when sigma is absent.
/// Throws FitFailureError if the curvature matrix at the optimum is singular.
FitReport least_squares(const CurveModel& model, std::span<const double> x, std::span<const double> y,
                        std::optional<std::span<const double>> sigma, std::vector<double> init,
                        const std::optional<ParameterBounds>& bounds = std::nullopt,
                        const LeastSquaresOptions& options = {});

/// Central-difference gradient, step = rel_step * max(|p_k|, 1).
std::vector<double> finite_difference_gradient(const CurveModel& model, double x, std::span<const double> params,
                                               double rel_step = 1e-6);

struct SlopeFit {
  double slope = 0.0;
  double sigma = 0.0;
  double reduced_chi2 = 0.0;
  std::size_t points = 0;
};

/// Weighted y = slope * x. Throws DomainError if every x is zero.
SlopeFit linear_fit_zero_intercept(std::span<const double> x, std::span<const double> y,
                                   std::optional<std::span<const double>> sigma = std::nullopt);

struct LinearFit {
  std::vector<double> coefficients;
  std::vector<double> covariance;  // row-major
  double reduced_chi2 = 0.0;
  double residual_norm = 0.0;

  double sigma(std::size_t k) const;
};

/// Weighted linear least squares y ~ design * c. `design` holds one row per
/// observation. Throws FitFailureError when the normal matrix is singular.
LinearFit weighted_linear_fit(const std::vector<std::vector<double>>& design, std::span<const double> y,
                              std::optional<std::span<const double>> sigma = std::nullopt);

struct ExponentialFit {
  double gamma_khz = 0.0;
  double p_inf = 0.0;
  double amplitude = 0.0;
  FitReport report;
};

/// Fits p_inf + amplitude exp(-gamma tau). A curve with no variation is
/// returned as a non-converged, degenerate report (gamma NaN, amplitude 0).
ExponentialFit fit_exponential_decay(const DecayCurve& curve, const LeastSquaresOptions& options = {});

struct LorentzianFit {
  double center = 0.0;
  double fwhm = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  FitReport report;
};

/// Seeds from the maximum and its half-maximum crossings, then refines with
/// least_squares. Throws FitFailureError when there is no peak at least three
/// standard deviations above the baseline.
LorentzianFit fit_lorentzian_peak(const Spectrum& spectrum, const LeastSquaresOptions& options = {});

struct ScannedPeak {
  double center = 0.0;
  double fwhm = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double grid_position = 0.0;  // abscissa of the local maximum
  bool fitted = false;         // false if the local Lorentzian fit failed
  bool merged = false;         // another maximum lay within min_separation
};

/// Local maxima exceeding the median by `prominence`, at least
/// `min_separation` apart (the higher one wins), each refined by a local
/// Lorentzian fit. Sorted by center.
std::vector<ScannedPeak> scan_peaks(const Spectrum& spectrum, double prominence, double min_separation);

struct AngleFit {
  double amplitude = 0.0;
  double sigma = 0.0;
};

struct AnglePoint {
  double theta_deg = 0.0;
  double gamma = 0.0;
  std::optional<double> sigma;
};

/// Single-parameter fit of gamma = A sin^2(theta).
AngleFit fit_angle_amplitude(std::span<const AnglePoint> points);

}  // namespace omcspin
