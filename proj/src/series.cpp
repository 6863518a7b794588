#include "omcspin/series.hpp"

#include <cmath>

#include "omcspin/errors.hpp"

namespace omcspin {

namespace {

void check_sigmas(const std::optional<std::vector<double>>& sigmas, std::size_t n) {
  if (!sigmas) return;
  if (sigmas->size() != n) throw InvalidInputError("sigma length does not match data length");
  for (double s : *sigmas) {
    if (!std::isfinite(s) || s <= 0.0) throw InvalidInputError("sigma entries must be finite and positive");
  }
}

}  // namespace

Spectrum::Spectrum(std::vector<double> abscissa, std::vector<double> values,
                   std::optional<std::vector<double>> sigmas, std::string abscissa_unit,
                   std::string value_unit)
    : abscissa_(std::move(abscissa)),
      values_(std::move(values)),
      sigmas_(std::move(sigmas)),
      abscissa_unit_(std::move(abscissa_unit)),
      value_unit_(std::move(value_unit)) {
  if (abscissa_.size() != values_.size()) throw InvalidInputError("spectrum abscissa and values differ in length");
  for (std::size_t i = 0; i < abscissa_.size(); ++i) {
    require_finite(abscissa_[i], "spectrum abscissa");
    require_finite(values_[i], "spectrum value");
    if (i > 0 && !(abscissa_[i] > abscissa_[i - 1])) {
      throw InvalidInputError("spectrum abscissa must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
  check_sigmas(sigmas_, abscissa_.size());
}

std::optional<std::span<const double>> Spectrum::sigma_span() const {
  if (!sigmas_) return std::nullopt;
  return std::span<const double>(*sigmas_);
}

Spectrum Spectrum::slice(std::size_t first, std::size_t last) const {
  if (first > last || last > size()) throw InvalidInputError("spectrum slice out of range");
  std::vector<double> x(abscissa_.begin() + first, abscissa_.begin() + last);
  std::vector<double> y(values_.begin() + first, values_.begin() + last);
  std::optional<std::vector<double>> s;
  if (sigmas_) s.emplace(sigmas_->begin() + first, sigmas_->begin() + last);
  return Spectrum(std::move(x), std::move(y), std::move(s), abscissa_unit_, value_unit_);
}

DecayCurve::DecayCurve(std::vector<double> tau_us, std::vector<double> population,
                       std::optional<std::vector<double>> sigma)
    : tau_(std::move(tau_us)), population_(std::move(population)), sigma_(std::move(sigma)) {
  if (tau_.size() != population_.size()) throw InvalidInputError("decay curve tau and population differ in length");
  for (std::size_t i = 0; i < tau_.size(); ++i) {
    require_finite(tau_[i], "tau");
    require_finite(population_[i], "population");
    if (i > 0 && !(tau_[i] > tau_[i - 1])) throw InvalidInputError("decay curve tau must be increasing");
  }
  check_sigmas(sigma_, tau_.size());
}

std::optional<std::span<const double>> DecayCurve::sigma_span() const {
  if (!sigma_) return std::nullopt;
  return std::span<const double>(*sigma_);
}

std::vector<double> linspace(double start, double stop, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = start;
    return out;
  }
  const double step = (stop - start) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + step * static_cast<double>(i);
  if (count > 1) out.back() = stop;
  return out;
}

std::vector<double> arange_inclusive(double start, double stop, double step) {
  if (!(step > 0.0)) throw InvalidInputError("grid step must be positive");
  if (stop < start) throw InvalidInputError("grid stop precedes start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = start + step * static_cast<double>(i);
  return out;
}

}  // namespace omcspin
