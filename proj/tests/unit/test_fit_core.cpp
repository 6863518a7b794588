#include <doctest.h>

#include <cmath>
#include <random>

#include "omcspin/errors.hpp"
#include "omcspin/fit_core.hpp"

using namespace omcspin;

namespace {

std::vector<double> lorentz(const std::vector<double>& x, double c, double w, double a, double b) {
  LorentzianModel m;
  const std::vector<double> p{c, w, a, b};
  std::vector<double> y;
  for (double xi : x) y.push_back(m.value(xi, p));
  return y;
}

}  // namespace

TEST_CASE("lorentzian model is half maximum at half width") {
  LorentzianModel m;
  const std::vector<double> p{12.06, 0.035, 9.0, 1.0};
  CHECK(m.value(12.06, p) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(m.value(12.06 + 0.0175, p) == doctest::Approx(5.5).epsilon(1e-12));
  CHECK(m.value(12.06 - 0.0175, p) == doctest::Approx(5.5).epsilon(1e-12));
}

TEST_CASE("analytic gradients agree with finite differences") {
  const LorentzianModel lor;
  const ExponentialDecayModel exp_model;
  const SinSquaredModel sin2;
  const std::vector<std::pair<const CurveModel*, std::vector<double>>> cases{
      {&lor, {1.0, 0.5, 2.0, 0.3}}, {&exp_model, {7.0, 0.9, -0.8}}, {&sin2, {3.0}}};
  for (const auto& [model, p] : cases) {
    std::vector<double> g(p.size());
    for (double x : {0.2, 0.9, 1.4, 30.0, 77.0}) {
      model->gradient(x, p, g);
      const auto fd = finite_difference_gradient(*model, x, p);
      for (std::size_t k = 0; k < g.size(); ++k) CHECK(g[k] == doctest::Approx(fd[k]).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("function model falls back to finite differences") {
  FunctionModel m({"a", "b"}, [](double x, std::span<const double> p) { return p[0] * x * x + p[1]; });
  std::vector<double> g(2);
  const std::vector<double> p{2.0, 1.0};
  m.gradient(3.0, p, g);
  CHECK(g[0] == doctest::Approx(9.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("least squares recovers exact parameters and reports names") {
  const auto x = linspace(-1.0, 1.0, 101);
  const auto y = lorentz(x, 0.1, 0.3, 2.0, 0.5);
  const auto r = least_squares(LorentzianModel{}, x, y, std::nullopt, {0.05, 0.25, 1.7, 0.4});
  CHECK(r.converged);
  CHECK(r.value("center") == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(r.value("fwhm") == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(r.value("amplitude") == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.value("baseline") == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(r.residual_norm < 1e-9);
  CHECK_THROWS_AS(r.index_of("nope"), InvalidInputError);
}

TEST_CASE("bounds are enforced by projection") {
  const auto x = linspace(0.0, 100.0, 30);
  std::vector<double> y;
  for (double t : x) y.push_back(1.0 - std::exp(-0.02 * t));
  ParameterBounds b{{0.0, -10.0, -10.0}, {5.0, 10.0, 10.0}};
  // The unconstrained optimum (20 kHz) lies above the box.
  const auto r = least_squares(ExponentialDecayModel{}, x, y, std::nullopt, {4.0, 1.0, -1.0}, b);
  CHECK(r.value("gamma_khz") == 5.0);
  ParameterBounds wide{{0.0, -10.0, -10.0}, {50.0, 10.0, 10.0}};
  const auto free = least_squares(ExponentialDecayModel{}, x, y, std::nullopt, {4.0, 1.0, -1.0}, wide);
  CHECK(free.value("gamma_khz") == doctest::Approx(20.0).epsilon(1e-8));
  CHECK_THROWS_AS(least_squares(ExponentialDecayModel{}, x, y, std::nullopt, {60.0, 1.0, -1.0}, wide),
                  InvalidInputError);
}

TEST_CASE("iteration cap is reported as not converged") {
  const auto x = linspace(-1.0, 1.0, 101);
  const auto y = lorentz(x, 0.1, 0.3, 2.0, 0.5);
  LeastSquaresOptions opt;
  opt.max_iterations = 1;
  const auto r = least_squares(LorentzianModel{}, x, y, std::nullopt, {0.0, 0.5, 1.0, 0.0}, std::nullopt, opt);
  CHECK_FALSE(r.converged);
}

TEST_CASE("singular curvature throws a fit failure") {
  // Two parameters that enter only through their sum.
  FunctionModel m({"a", "b"}, [](double x, std::span<const double> p) { return (p[0] + p[1]) * x; },
                  [](double x, std::span<const double>, std::span<double> g) { g[0] = x; g[1] = x; });
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8};
  CHECK_THROWS_AS(least_squares(m, x, y, std::nullopt, {1.0, 0.5}), FitFailureError);
}

TEST_CASE("input validation") {
  const std::vector<double> x{1, 2, 3}, y{1, 2};
  CHECK_THROWS_AS(least_squares(SinSquaredModel{}, x, y, std::nullopt, {1.0}), InvalidInputError);
  const std::vector<double> y3{1, 2, 3};
  CHECK_THROWS_AS(least_squares(SinSquaredModel{}, x, y3, std::nullopt, {1.0, 2.0}), InvalidInputError);
}

TEST_CASE("sigma weighting gives covariance independent of scatter") {
  const auto x = linspace(1.0, 10.0, 10);
  std::vector<double> y, s(10, 0.5);
  for (double xi : x) y.push_back(3.0 * xi);
  const auto f = linear_fit_zero_intercept(x, y, s);
  double sxx = 0.0;
  for (double xi : x) sxx += xi * xi;
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(f.sigma == doctest::Approx(0.5 / std::sqrt(sxx)).epsilon(1e-12));
  CHECK(f.points == 10);
}

TEST_CASE("zero-intercept fit rejects all-zero abscissa") {
  const std::vector<double> x{0, 0, 0}, y{1, 2, 3};
  CHECK_THROWS_AS(linear_fit_zero_intercept(x, y), DomainError);
}

TEST_CASE("weighted linear fit") {
  std::vector<std::vector<double>> design;
  std::vector<double> y;
  for (int i = 0; i < 6; ++i) {
    design.push_back({1.0, static_cast<double>(i)});
    y.push_back(2.0 + 0.5 * i);
  }
  const auto f = weighted_linear_fit(design, y);
  CHECK(f.coefficients[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(f.coefficients[1] == doctest::Approx(0.5).epsilon(1e-13));
  std::vector<std::vector<double>> singular(4, {1.0, 1.0});
  const std::vector<double> ys{1, 1, 1, 1};
  CHECK_THROWS_AS(weighted_linear_fit(singular, ys), FitFailureError);
}

TEST_CASE("exponential decay fit") {
  const auto tau = linspace(1.0, 500.0, 20);
  std::vector<double> p;
  for (double t : tau) p.push_back(0.93 - 0.93 * std::exp(-10.0 * 1e-3 * t));
  const auto f = fit_exponential_decay(DecayCurve(tau, p));
  CHECK(f.report.converged);
  CHECK(f.gamma_khz == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(f.p_inf == doctest::Approx(0.93).epsilon(1e-9));
  CHECK(f.amplitude == doctest::Approx(-0.93).epsilon(1e-9));
}

TEST_CASE("constant decay curve is degenerate, not an exception") {
  const auto tau = linspace(1.0, 500.0, 10);
  const std::vector<double> p(10, 0.4);
  const auto f = fit_exponential_decay(DecayCurve(tau, p));
  CHECK(f.report.degenerate);
  CHECK_FALSE(f.report.converged);
  CHECK(std::isnan(f.gamma_khz));
}

TEST_CASE("exponential fit needs four points") {
  const std::vector<double> t{1, 2, 3}, p{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(fit_exponential_decay(DecayCurve(t, p)), InvalidInputError);
}

TEST_CASE("lorentzian peak fit and flat-spectrum rejection") {
  const auto x = linspace(11.7, 12.4, 401);
  const auto f = fit_lorentzian_peak(Spectrum(x, lorentz(x, 12.06, 0.035, 9.0, 1.0)));
  CHECK(f.center == doctest::Approx(12.06).epsilon(1e-10));
  CHECK(f.fwhm == doctest::Approx(0.035).epsilon(1e-9));
  CHECK_THROWS_AS(fit_lorentzian_peak(Spectrum(x, std::vector<double>(x.size(), 2.0))), FitFailureError);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> noise;
  for (std::size_t i = 0; i < x.size(); ++i) noise.push_back(5.0 + n(rng));
  CHECK_THROWS_AS(fit_lorentzian_peak(Spectrum(x, noise)), FitFailureError);
}

TEST_CASE("scan_peaks finds separated modes and merges close ones") {
  const auto x = linspace(11.0, 13.0, 2001);
  auto y = lorentz(x, 11.5, 0.02, 5.0, 1.0);
  const auto y2 = lorentz(x, 12.5, 0.04, 3.0, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += y2[i];
  const auto peaks = scan_peaks(Spectrum(x, y), 1.0, 0.1);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].center == doctest::Approx(11.5).epsilon(1e-6));
  CHECK(peaks[1].center == doctest::Approx(12.5).epsilon(1e-6));
  CHECK(peaks[1].fwhm == doctest::Approx(0.04).epsilon(1e-3));
  CHECK(peaks[0].fitted);

  const auto y3 = lorentz(x, 11.55, 0.02, 2.0, 0.0);
  auto close = lorentz(x, 11.5, 0.02, 5.0, 1.0);
  for (std::size_t i = 0; i < close.size(); ++i) close[i] += y3[i];
  const auto merged = scan_peaks(Spectrum(x, close), 1.0, 0.1);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].merged);
}

TEST_CASE("angle amplitude fit") {
  std::vector<AnglePoint> pts;
  for (double th : {10.0, 30.0, 55.0, 80.0}) {
    const double s = std::sin(th * M_PI / 180.0);
    pts.push_back({th, 4.0 * s * s, 0.1});
  }
  const auto f = fit_angle_amplitude(pts);
  CHECK(f.amplitude == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(f.sigma > 0.0);
  const std::vector<AnglePoint> zeros{{0.0, 1.0, {}}, {0.0, 2.0, {}}};
  CHECK_THROWS_AS(fit_angle_amplitude(zeros), DomainError);
}

TEST_CASE("property: exact-data fits are invariant to the seeded starting point") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.85, 1.15);
  const auto x = linspace(-2.0, 2.0, 201);
  for (int trial = 0; trial < 25; ++trial) {
    const double c = 0.3 * (u(rng) - 1.0), w = 0.4 * u(rng), a = 3.0 * u(rng), b = u(rng) - 1.0;
    const auto r = least_squares(LorentzianModel{}, x, lorentz(x, c, w, a, b), std::nullopt,
                                 {c + 0.02, w * u(rng), a * u(rng), b + 0.05});
    CHECK(r.converged);
    CHECK(r.values[1] == doctest::Approx(w).epsilon(1e-8));
  }
}
