#include "omcspin/fit_core.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "omcspin/errors.hpp"

namespace omcspin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

// Robust noise estimate from first differences (1.4826 MAD / sqrt 2).
double difference_noise(std::span<const double> y) {
  if (y.size() < 3) return 0.0;
  std::vector<double> d(y.size() - 1);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) d[i] = y[i + 1] - y[i];
  const double m = median(d);
  for (auto& v : d) v = std::abs(v - m);
  return 1.4826 * median(d) / std::numbers::sqrt2;
}

bool singular_curvature(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(a(i, i) > 0.0) || !std::isfinite(a(i, i))) return true;
    scale(i) = 1.0 / std::sqrt(a(i, i));
  }
  const Eigen::MatrixXd s = scale.asDiagonal() * a * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return true;
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  return !(lo > 1e-13 * hi);
}

struct Evaluation {
  Eigen::VectorXd residual;  // weighted (f - y) / sigma
  Eigen::MatrixXd jacobian;  // weighted
  double cost = 0.0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Models

FunctionModel::FunctionModel(std::vector<std::string> names, ValueFn value, GradientFn gradient)
    : names_(std::move(names)), value_(std::move(value)), gradient_(std::move(gradient)) {
  if (!value_) throw InvalidInputError("FunctionModel needs a value callable");
}

void FunctionModel::gradient(double x, std::span<const double> params, std::span<double> out) const {
  if (gradient_) {
    gradient_(x, params, out);
    return;
  }
  const auto g = finite_difference_gradient(*this, x, params);
  std::copy(g.begin(), g.end(), out.begin());
}

std::vector<std::string> LorentzianModel::parameter_names() const {
  return {"center", "fwhm", "amplitude", "baseline"};
}

double LorentzianModel::value(double x, std::span<const double> p) const {
  const double h = 0.5 * p[1];
  const double u = x - p[0];
  return p[3] + p[2] * h * h / (u * u + h * h);
}

void LorentzianModel::gradient(double x, std::span<const double> p, std::span<double> out) const {
  const double h = 0.5 * p[1];
  const double u = x - p[0];
  const double d = u * u + h * h;
  out[0] = p[2] * h * h * 2.0 * u / (d * d);
  out[1] = p[2] * h * u * u / (d * d);
  out[2] = h * h / d;
  out[3] = 1.0;
}

std::vector<std::string> ExponentialDecayModel::parameter_names() const {
  return {"gamma_khz", "p_inf", "amplitude"};
}

// kHz * us = 1e-3
double ExponentialDecayModel::value(double tau_us, std::span<const double> p) const {
  return p[1] + p[2] * std::exp(-p[0] * 1e-3 * tau_us);
}

void ExponentialDecayModel::gradient(double tau_us, std::span<const double> p, std::span<double> out) const {
  const double e = std::exp(-p[0] * 1e-3 * tau_us);
  out[0] = -p[2] * 1e-3 * tau_us * e;
  out[1] = 1.0;
  out[2] = e;
}

std::vector<std::string> SinSquaredModel::parameter_names() const { return {"amplitude"}; }

double SinSquaredModel::value(double theta_deg, std::span<const double> p) const {
  const double s = std::sin(theta_deg * std::numbers::pi / 180.0);
  return p[0] * s * s;
}

void SinSquaredModel::gradient(double theta_deg, std::span<const double>, std::span<double> out) const {
  const double s = std::sin(theta_deg * std::numbers::pi / 180.0);
  out[0] = s * s;
}

std::vector<double> finite_difference_gradient(const CurveModel& model, double x, std::span<const double> params,
                                               double rel_step) {
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> g(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double step = rel_step * std::max(std::abs(params[k]), 1.0);
    p[k] = params[k] + step;
    const double up = model.value(x, p);
    p[k] = params[k] - step;
    const double down = model.value(x, p);
    p[k] = params[k];
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Nonlinear least squares

std::size_t FitReport::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw InvalidInputError("no fit parameter named '" + std::string(name) + "'");
}

FitReport least_squares(const CurveModel& model, std::span<const double> x, std::span<const double> y,
                        std::optional<std::span<const double>> sigma, std::vector<double> init,
                        const std::optional<ParameterBounds>& bounds, const LeastSquaresOptions& options) {
  const auto names = model.parameter_names();
  const std::size_t np = names.size();
  const std::size_t n = x.size();
  if (y.size() != n) throw InvalidInputError("x and y differ in length");
  if (sigma && sigma->size() != n) throw InvalidInputError("sigma length does not match data");
  if (init.size() != np) throw InvalidInputError("initial guess has the wrong number of parameters");
  if (n < np) throw InvalidInputError("fewer data points than parameters");
  for (double v : init) require_finite(v, "initial parameter");

  std::vector<double> lo(np, -std::numeric_limits<double>::infinity());
  std::vector<double> hi(np, std::numeric_limits<double>::infinity());
  if (bounds) {
    if (bounds->lower.size() != np || bounds->upper.size() != np) {
      throw InvalidInputError("bounds have the wrong number of parameters");
    }
    lo = bounds->lower;
    hi = bounds->upper;
    for (std::size_t k = 0; k < np; ++k) {
      if (!(init[k] >= lo[k] && init[k] <= hi[k])) {
        throw InvalidInputError("initial value of '" + names[k] + "' lies outside its bounds");
      }
    }
  }
  auto project = [&](Eigen::VectorXd& p) {
    for (std::size_t k = 0; k < np; ++k) p(static_cast<Eigen::Index>(k)) = std::clamp(p(static_cast<Eigen::Index>(k)), lo[k], hi[k]);
  };

  std::vector<double> grad(np);
  auto evaluate = [&](const Eigen::VectorXd& p, bool with_jacobian) {
    Evaluation ev;
    ev.residual.resize(static_cast<Eigen::Index>(n));
    if (with_jacobian) ev.jacobian.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(np));
    const std::span<const double> ps(p.data(), np);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = sigma ? 1.0 / (*sigma)[i] : 1.0;
      const auto row = static_cast<Eigen::Index>(i);
      ev.residual(row) = (model.value(x[i], ps) - y[i]) * w;
      if (with_jacobian) {
        model.gradient(x[i], ps, grad);
        for (std::size_t k = 0; k < np; ++k) ev.jacobian(row, static_cast<Eigen::Index>(k)) = grad[k] * w;
      }
    }
    ev.cost = ev.residual.squaredNorm();
    return ev;
  };

  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(np));
  Evaluation current = evaluate(p, true);
  if (!std::isfinite(current.cost)) throw FitFailureError("model is not finite at the initial guess", current.cost);

  double lambda = options.initial_damping;
  bool converged = false;
  int iterations = 0;
  std::string message = "iteration cap reached";

  while (iterations < options.max_iterations) {
    ++iterations;
    const Eigen::VectorXd g = current.jacobian.transpose() * current.residual;
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      converged = true;
      message = "gradient below tolerance";
      break;
    }
    const Eigen::MatrixXd a = current.jacobian.transpose() * current.jacobian;
    Eigen::VectorXd diag = a.diagonal();
    const double diag_floor = 1e-30 + 1e-15 * diag.maxCoeff();
    for (Eigen::Index k = 0; k < diag.size(); ++k) diag(k) = std::max(diag(k), diag_floor);

    Eigen::MatrixXd damped = a;
    damped.diagonal() += lambda * diag;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
    Eigen::VectorXd step = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      lambda *= options.damping_factor;
      continue;
    }

    Eigen::VectorXd candidate = p + step;
    project(candidate);
    const Eigen::VectorXd taken = candidate - p;
    bool small = true;
    for (Eigen::Index k = 0; k < taken.size(); ++k) {
      if (std::abs(taken(k)) > options.step_tolerance * (std::abs(p(k)) + options.step_tolerance)) {
        small = false;
        break;
      }
    }

    Evaluation trial = evaluate(candidate, false);
    if (std::isfinite(trial.cost) && trial.cost < current.cost) {
      p = candidate;
      current = evaluate(p, true);
      lambda = std::max(lambda / options.damping_factor, 1e-15);
      if (small) {
        converged = true;
        message = "relative step below tolerance";
        break;
      }
    } else {
      if (small) {
        converged = true;
        message = "relative step below tolerance";
        break;
      }
      lambda *= options.damping_factor;
      if (lambda > 1e30) {
        message = "damping diverged";
        break;
      }
    }
  }

  FitReport report;
  report.names = names;
  report.values.assign(p.data(), p.data() + np);
  report.residual_norm = std::sqrt(current.cost);
  report.iterations = iterations;
  report.converged = converged;
  report.message = message;

  const Eigen::MatrixXd curvature = current.jacobian.transpose() * current.jacobian;
  if (singular_curvature(curvature)) {
    throw FitFailureError("singular Jacobian at the optimum", report.residual_norm);
  }
  const std::size_t dof = n - np;
  report.reduced_chi2 = dof > 0 ? current.cost / static_cast<double>(dof) : 0.0;
  double scale = 1.0;
  if (!sigma) {
    if (dof > 0) {
      scale = report.reduced_chi2;
    } else {
      scale = current.cost == 0.0 ? 0.0 : kNaN;
    }
  }
  const Eigen::MatrixXd cov = curvature.ldlt().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np))) * scale;
  report.covariance.resize(np * np);
  report.sigmas.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < np; ++j) {
      report.covariance[i * np + j] = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    report.sigmas[i] = std::sqrt(std::max(report.covariance[i * np + i], 0.0));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Linear fits

SlopeFit linear_fit_zero_intercept(std::span<const double> x, std::span<const double> y,
                                   std::optional<std::span<const double>> sigma) {
  if (x.size() != y.size()) throw InvalidInputError("x and y differ in length");
  if (sigma && sigma->size() != x.size()) throw InvalidInputError("sigma length does not match data");
  if (x.empty()) throw InvalidInputError("no data points");
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = sigma ? 1.0 / ((*sigma)[i] * (*sigma)[i]) : 1.0;
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  if (sxx == 0.0) throw DomainError("zero-intercept fit needs at least one non-zero abscissa");

  SlopeFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = sigma ? 1.0 / ((*sigma)[i] * (*sigma)[i]) : 1.0;
    const double r = y[i] - fit.slope * x[i];
    chi2 += w * r * r;
  }
  const std::size_t dof = x.size() - 1;
  fit.reduced_chi2 = dof > 0 ? chi2 / static_cast<double>(dof) : 0.0;
  if (sigma) {
    fit.sigma = 1.0 / std::sqrt(sxx);
  } else if (dof > 0) {
    fit.sigma = std::sqrt(fit.reduced_chi2 / sxx);
  } else {
    fit.sigma = kNaN;
  }
  return fit;
}

double LinearFit::sigma(std::size_t k) const {
  const std::size_t n = coefficients.size();
  return std::sqrt(std::max(covariance[k * n + k], 0.0));
}

LinearFit weighted_linear_fit(const std::vector<std::vector<double>>& design, std::span<const double> y,
                              std::optional<std::span<const double>> sigma) {
  const std::size_t n = design.size();
  if (n != y.size()) throw InvalidInputError("design rows and observations differ in count");
  if (sigma && sigma->size() != n) throw InvalidInputError("sigma length does not match data");
  if (n == 0) throw InvalidInputError("no observations");
  const std::size_t np = design.front().size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(np));
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (design[i].size() != np) throw InvalidInputError("ragged design matrix");
    const double w = sigma ? 1.0 / (*sigma)[i] : 1.0;
    for (std::size_t k = 0; k < np; ++k) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = design[i][k] * w;
    b(static_cast<Eigen::Index>(i)) = y[i] * w;
  }
  const Eigen::MatrixXd normal = a.transpose() * a;
  if (n < np || singular_curvature(normal)) throw FitFailureError("degenerate design matrix", kNaN);

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::VectorXd c = qr.solve(b);
  const double chi2 = (a * c - b).squaredNorm();
  const std::size_t dof = n - np;

  LinearFit fit;
  fit.coefficients.assign(c.data(), c.data() + np);
  fit.residual_norm = std::sqrt(chi2);
  fit.reduced_chi2 = dof > 0 ? chi2 / static_cast<double>(dof) : 0.0;
  double scale = 1.0;
  if (!sigma) scale = dof > 0 ? fit.reduced_chi2 : (chi2 == 0.0 ? 0.0 : kNaN);
  const Eigen::MatrixXd cov =
      normal.ldlt().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np))) * scale;
  fit.covariance.resize(np * np);
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < np; ++j) fit.covariance[i * np + j] = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Exponential decay

ExponentialFit fit_exponential_decay(const DecayCurve& curve, const LeastSquaresOptions& options) {
  if (curve.size() < 4) throw InvalidInputError("exponential fit needs at least 4 points");
  const auto tau = curve.tau_us();
  const auto pop = curve.population();

  const auto [mn, mx] = std::minmax_element(pop.begin(), pop.end());
  const double scale = std::max({1.0, std::abs(*mn), std::abs(*mx)});
  if (*mx - *mn <= 1e-12 * scale) {
    ExponentialFit fit;
    fit.gamma_khz = kNaN;
    fit.p_inf = pop.front();
    fit.amplitude = 0.0;
    fit.report.names = ExponentialDecayModel{}.parameter_names();
    fit.report.values = {kNaN, pop.front(), 0.0};
    fit.report.sigmas = {kNaN, kNaN, kNaN};
    fit.report.covariance.assign(9, kNaN);
    fit.report.converged = false;
    fit.report.degenerate = true;
    fit.report.message = "constant curve: decay rate is unidentifiable";
    return fit;
  }

  // Log-linear seed on baseline-subtracted data.
  const double p_inf0 = pop.back();
  const double a0 = pop.front() - p_inf0;
  const double tau_span = tau.back() - tau.front();
  double gamma0 = 3e3 / std::max(tau_span, 1e-9);
  {
    double st = 0, sl = 0, stt = 0, stl = 0;
    int m = 0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      const double d = (pop[i] - p_inf0) / a0;
      if (d > 0.05) {
        const double l = std::log(d);
        st += tau[i];
        sl += l;
        stt += tau[i] * tau[i];
        stl += tau[i] * l;
        ++m;
      }
    }
    if (m >= 2) {
      const double denom = m * stt - st * st;
      if (denom > 0) {
        const double slope = (m * stl - st * sl) / denom;
        if (slope < 0) gamma0 = -slope * 1e3;
      }
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  ParameterBounds bounds{{0.0, -inf, -inf}, {inf, inf, inf}};
  ExponentialDecayModel model;
  auto report = least_squares(model, tau, pop, curve.sigma_span(), {gamma0, p_inf0, a0}, bounds, options);

  ExponentialFit fit;
  fit.gamma_khz = report.values[0];
  fit.p_inf = report.values[1];
  fit.amplitude = report.values[2];
  fit.report = std::move(report);
  return fit;
}

// ---------------------------------------------------------------------------
// Lorentzian peaks

namespace {

struct PeakSeed {
  std::size_t index = 0;
  double baseline = 0.0;
  double height = 0.0;
  double fwhm = 0.0;
};

double half_max_crossing(std::span<const double> x, std::span<const double> y, std::size_t peak, double level,
                         int direction, bool& found) {
  found = false;
  std::size_t i = peak;
  while (true) {
    if (direction < 0 && i == 0) break;
    if (direction > 0 && i + 1 >= x.size()) break;
    const std::size_t j = direction < 0 ? i - 1 : i + 1;
    if (y[j] <= level) {
      found = true;
      const double t = (y[i] - level) / (y[i] - y[j]);
      return x[i] + t * (x[j] - x[i]);
    }
    i = j;
  }
  return x[i];
}

PeakSeed seed_peak(std::span<const double> x, std::span<const double> y, std::size_t peak, double baseline) {
  PeakSeed s;
  s.index = peak;
  s.baseline = baseline;
  s.height = y[peak] - baseline;
  const double level = baseline + 0.5 * s.height;
  bool left_ok = false, right_ok = false;
  const double left = half_max_crossing(x, y, peak, level, -1, left_ok);
  const double right = half_max_crossing(x, y, peak, level, +1, right_ok);
  if (left_ok && right_ok) {
    s.fwhm = right - left;
  } else if (left_ok) {
    s.fwhm = 2.0 * (x[peak] - left);
  } else if (right_ok) {
    s.fwhm = 2.0 * (right - x[peak]);
  } else {
    s.fwhm = 0.25 * (x.back() - x.front());
  }
  const double min_step = x.size() > 1 ? (x.back() - x.front()) / static_cast<double>(x.size() - 1) : 1.0;
  s.fwhm = std::max(s.fwhm, 0.5 * min_step);
  return s;
}

LorentzianFit refine_peak(const Spectrum& spectrum, const PeakSeed& seed, double noise, const LeastSquaresOptions& options) {
  const auto x = spectrum.abscissa();
  const auto y = spectrum.values();
  const double span = x.back() - x.front();
  const double inf = std::numeric_limits<double>::infinity();
  ParameterBounds bounds{{x.front() - span, 1e-12 * std::max(span, 1e-300), 0.0, -inf},
                         {x.back() + span, 10.0 * span, inf, inf}};
  std::vector<double> init{x[seed.index], seed.fwhm, seed.height, seed.baseline};
  init[1] = std::clamp(init[1], bounds.lower[1], bounds.upper[1]);

  LorentzianModel model;
  auto report = least_squares(model, x, y, spectrum.sigma_span(), init, bounds, options);

  LorentzianFit fit;
  fit.center = report.values[0];
  fit.fwhm = report.values[1];
  fit.amplitude = report.values[2];
  fit.baseline = report.values[3];
  const double sa = report.sigmas[2];
  const bool significant = fit.amplitude > 0.0 && (!(sa > 0.0) || fit.amplitude >= 3.0 * sa) &&
                           (noise == 0.0 || fit.amplitude >= 3.0 * noise);
  if (!significant) {
    throw FitFailureError("no peak at least 3 sigma above the baseline", report.residual_norm);
  }
  fit.report = std::move(report);
  return fit;
}

double noise_level(const Spectrum& spectrum) {
  if (const auto& s = spectrum.sigmas()) return median(*s);
  return difference_noise(spectrum.values());
}

}  // namespace

LorentzianFit fit_lorentzian_peak(const Spectrum& spectrum, const LeastSquaresOptions& options) {
  if (spectrum.size() < 8) throw InvalidInputError("Lorentzian fit needs at least 8 points");
  const auto x = spectrum.abscissa();
  const auto y = spectrum.values();

  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  const double baseline = sorted[sorted.size() / 10];
  const double med = median(sorted);
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double noise = noise_level(spectrum);
  const double height = y[peak] - med;
  const double scale = std::max(std::abs(y[peak]), std::abs(med));
  if (!(height > 3.0 * noise) || !(y[peak] - baseline > 1e-12 * std::max(scale, 1e-300))) {
    throw FitFailureError("no peak at least 3 sigma above the baseline", kNaN);
  }
  return refine_peak(spectrum, seed_peak(x, y, peak, baseline), noise, options);
}

std::vector<ScannedPeak> scan_peaks(const Spectrum& spectrum, double prominence, double min_separation) {
  if (spectrum.empty()) throw InvalidInputError("scan_peaks needs a non-empty spectrum");
  const auto x = spectrum.abscissa();
  const auto y = spectrum.values();
  const std::size_t n = x.size();
  const double med = median(std::vector<double>(y.begin(), y.end()));

  // Plateaus resolve to their lowest-frequency bin.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] - med >= prominence) candidates.push_back(i);
  }
  std::vector<std::size_t> by_height = candidates;
  std::stable_sort(by_height.begin(), by_height.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });

  std::vector<std::size_t> accepted;
  std::vector<bool> merged;
  for (std::size_t c : by_height) {
    bool keep = true;
    for (std::size_t k = 0; k < accepted.size(); ++k) {
      if (std::abs(x[c] - x[accepted[k]]) < min_separation) {
        keep = false;
        merged[k] = true;
        break;
      }
    }
    if (keep) {
      accepted.push_back(c);
      merged.push_back(false);
    }
  }

  std::vector<std::size_t> order(accepted.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return accepted[a] < accepted[b]; });

  std::vector<ScannedPeak> peaks;
  peaks.reserve(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t idx = accepted[order[r]];
    ScannedPeak peak;
    peak.grid_position = x[idx];
    peak.center = x[idx];
    peak.amplitude = y[idx] - med;
    peak.baseline = med;
    peak.merged = merged[order[r]];

    // Window: a few half-widths, clipped at the valley towards each neighbour.
    std::size_t lo = 0, hi = n - 1;
    if (r > 0) {
      const std::size_t prev = accepted[order[r - 1]];
      lo = static_cast<std::size_t>(std::min_element(y.begin() + static_cast<std::ptrdiff_t>(prev),
                                                     y.begin() + static_cast<std::ptrdiff_t>(idx) + 1) - y.begin());
    }
    if (r + 1 < order.size()) {
      const std::size_t next = accepted[order[r + 1]];
      hi = static_cast<std::size_t>(std::min_element(y.begin() + static_cast<std::ptrdiff_t>(idx),
                                                     y.begin() + static_cast<std::ptrdiff_t>(next) + 1) - y.begin());
    }
    const double local_base = std::min(y[lo], y[hi]);
    const PeakSeed rough = seed_peak(x, y, idx, local_base);
    peak.fwhm = rough.fwhm;
    const double reach = 5.0 * rough.fwhm;
    while (lo < idx && x[idx] - x[lo] > reach) ++lo;
    while (hi > idx && x[hi] - x[idx] > reach) --hi;
    while (hi - lo + 1 < 8 && (lo > 0 || hi + 1 < n)) {
      if (lo > 0) --lo;
      if (hi + 1 < n && hi - lo + 1 < 8) ++hi;
    }

    if (hi - lo + 1 >= 8) {
      try {
        const Spectrum window = spectrum.slice(lo, hi + 1);
        const PeakSeed seed = seed_peak(window.abscissa(), window.values(), idx - lo,
                                        std::min(window.values().front(), window.values().back()));
        const LorentzianFit fit = refine_peak(window, seed, 0.0, {});
        if (fit.center >= x[lo] && fit.center <= x[hi]) {
          peak.center = fit.center;
          peak.fwhm = fit.fwhm;
          peak.amplitude = fit.amplitude;
          peak.baseline = fit.baseline;
          peak.fitted = true;
        }
      } catch (const FitFailureError&) {
      }
    }
    peaks.push_back(peak);
  }
  std::sort(peaks.begin(), peaks.end(), [](const ScannedPeak& a, const ScannedPeak& b) { return a.center < b.center; });
  return peaks;
}

// ---------------------------------------------------------------------------

AngleFit fit_angle_amplitude(std::span<const AnglePoint> points) {
  if (points.empty()) throw InvalidInputError("angle fit needs at least one point");
  std::vector<double> s2, g, sig;
  bool all_sigma = true;
  for (const auto& pt : points) {
    require_finite(pt.theta_deg, "theta");
    require_finite(pt.gamma, "decay rate");
    const double s = std::sin(pt.theta_deg * std::numbers::pi / 180.0);
    s2.push_back(s * s);
    g.push_back(pt.gamma);
    if (pt.sigma) {
      sig.push_back(*pt.sigma);
    } else {
      all_sigma = false;
    }
  }
  std::optional<std::span<const double>> sigma;
  if (all_sigma) sigma = std::span<const double>(sig);
  SlopeFit fit;
  try {
    fit = linear_fit_zero_intercept(s2, g, sigma);
  } catch (const DomainError&) {
    throw DomainError("angle fit needs at least one angle with sin(theta) != 0");
  }
  return {fit.slope, fit.sigma};
}

}  // namespace omcspin
