#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace omcspin {

/// Sampled curve with a strictly increasing abscissa. Units are carried as
/// free-form labels ("GHz", "kHz", ...) and only used for I/O.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(std::vector<double> abscissa, std::vector<double> values,
           std::optional<std::vector<double>> sigmas = std::nullopt,
           std::string abscissa_unit = {}, std::string value_unit = {});

  std::size_t size() const { return abscissa_.size(); }
  bool empty() const { return abscissa_.empty(); }

  std::span<const double> abscissa() const { return abscissa_; }
  std::span<const double> values() const { return values_; }
  const std::optional<std::vector<double>>& sigmas() const { return sigmas_; }
  std::optional<std::span<const double>> sigma_span() const;

  const std::string& abscissa_unit() const { return abscissa_unit_; }
  const std::string& value_unit() const { return value_unit_; }

  // Contiguous sub-range [first, last).
  Spectrum slice(std::size_t first, std::size_t last) const;

 private:
  std::vector<double> abscissa_;
  std::vector<double> values_;
  std::optional<std::vector<double>> sigmas_;
  std::string abscissa_unit_;
  std::string value_unit_;
};

/// Relaxed-population series versus wait time (tau in microseconds).
class DecayCurve {
 public:
  DecayCurve() = default;
  DecayCurve(std::vector<double> tau_us, std::vector<double> population,
             std::optional<std::vector<double>> sigma = std::nullopt);

  std::size_t size() const { return tau_.size(); }
  std::span<const double> tau_us() const { return tau_; }
  std::span<const double> population() const { return population_; }
  const std::optional<std::vector<double>>& sigma() const { return sigma_; }
  std::optional<std::span<const double>> sigma_span() const;

 private:
  std::vector<double> tau_;
  std::vector<double> population_;
  std::optional<std::vector<double>> sigma_;
};

std::vector<double> linspace(double start, double stop, std::size_t count);
// Grid start, start+step, ... up to and including stop (within half a step).
std::vector<double> arange_inclusive(double start, double stop, double step);

}  // namespace omcspin
