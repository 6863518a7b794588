#include "omcspin/measurement_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "omcspin/errors.hpp"
#include "omcspin/seeds.hpp"

namespace omcspin::sim {

void PulseSequence::validate() const {
  for (double v : {repump_us, pump_us, wait_tau_us, probe_us, bin_width_ns}) {
    require_finite(v, "pulse sequence duration");
    if (!(v > 0.0)) throw InvalidInputError("pulse sequence durations and bin width must be positive");
  }
  if (repetitions == 0) throw InvalidInputError("repetitions must be positive");
}

void RateModel::validate() const {
  for (double v : {pump_rate, gamma_s_khz, detect_rate_max, background}) {
    require_finite(v, "rate");
    if (v < 0.0) throw InvalidInputError("rates must be non-negative");
  }
  if (!(p_thermal_up >= 0.0 && p_thermal_up <= 1.0)) throw InvalidInputError("p_thermal_up must lie in [0, 1]");
  if (!(init_fidelity > 0.0 && init_fidelity <= 1.0)) throw InvalidInputError("init_fidelity must lie in (0, 1]");
}

const Segment& Histogram::segment(const std::string& name) const {
  for (const auto& s : segments) {
    if (s.name == name) return s;
  }
  throw ExtractionError("histogram has no '" + name + "' segment");
}

double Histogram::segment_duration_us(const std::string& name) const {
  return static_cast<double>(segment(name).bins) * bin_width_ns * 1e-3;
}

namespace {

struct Layout {
  std::vector<Segment> segments;
  std::vector<std::string> warnings;
  double bin_us = 0.0;
  double pump_us = 0.0, wait_us = 0.0, probe_us = 0.0, repump_us = 0.0;
  std::size_t total_bins = 0;
};

Layout layout(const PulseSequence& seq) {
  seq.validate();
  Layout l;
  l.bin_us = seq.bin_width_ns * 1e-3;
  const std::pair<const char*, double> parts[] = {
      {"repump", seq.repump_us}, {"pump", seq.pump_us}, {"wait", seq.wait_tau_us}, {"probe", seq.probe_us}};
  std::size_t first = 0;
  for (const auto& [name, duration] : parts) {
    const double exact = duration * 1000.0 / seq.bin_width_ns;
    const auto bins = static_cast<std::size_t>(std::floor(exact + 1e-9));
    if (bins == 0) throw InvalidInputError(std::string(name) + " pulse is shorter than one bin");
    const double lost = (exact - static_cast<double>(bins)) / exact;
    if (lost > 0.01) {
      std::ostringstream msg;
      msg << name << " duration rounded down to " << bins << " bins (" << lost * 100.0 << "% lost)";
      l.warnings.push_back(msg.str());
    }
    l.segments.push_back({name, first, bins});
    first += bins;
  }
  l.total_bins = first;
  l.repump_us = static_cast<double>(l.segments[0].bins) * l.bin_us;
  l.pump_us = static_cast<double>(l.segments[1].bins) * l.bin_us;
  l.wait_us = static_cast<double>(l.segments[2].bins) * l.bin_us;
  l.probe_us = static_cast<double>(l.segments[3].bins) * l.bin_us;
  return l;
}

// Population left in the addressed state after a pumping pulse of length t.
double pumped(double p0, double pump_rate, double t) { return p0 * std::exp(-pump_rate * t); }

double relaxed(double p0, const RateModel& m, double t) {
  const double target = 1.0 - m.p_thermal_up;
  return target + (p0 - target) * std::exp(-m.gamma_s_khz * 1e-3 * t);
}

// Integral over [t0, t1] of p0 exp(-r t).
double pumped_integral(double p0, double r, double t0, double t1) {
  if (r == 0.0) return p0 * (t1 - t0);
  return p0 * (std::exp(-r * t0) - std::exp(-r * t1)) / r;
}

}  // namespace

double population_down(const PulseSequence& seq, const RateModel& model, double t_us) {
  model.validate();
  const Layout l = layout(seq);
  const double p_repump = model.init_fidelity;
  if (t_us < l.repump_us) return p_repump;
  double t = t_us - l.repump_us;
  if (t < l.pump_us) return pumped(p_repump, model.pump_rate, t);
  const double p_after_pump = pumped(p_repump, model.pump_rate, l.pump_us);
  t -= l.pump_us;
  if (t < l.wait_us) return relaxed(p_after_pump, model, t);
  const double p_probe = relaxed(p_after_pump, model, l.wait_us);
  t -= l.wait_us;
  return pumped(p_probe, model.pump_rate, std::min(t, l.probe_us));
}

std::vector<double> expected_counts(const PulseSequence& seq, const RateModel& model) {
  model.validate();
  const Layout l = layout(seq);
  std::vector<double> counts(l.total_bins, model.background * l.bin_us);

  const double p_pump = model.init_fidelity;
  const double p_probe = relaxed(pumped(p_pump, model.pump_rate, l.pump_us), model, l.wait_us);
  for (const auto& [index, p0] : {std::pair<std::size_t, double>{1, p_pump}, {3, p_probe}}) {
    const Segment& s = l.segments[index];
    for (std::size_t b = 0; b < s.bins; ++b) {
      const double t0 = static_cast<double>(b) * l.bin_us;
      counts[s.first_bin + b] += model.detect_rate_max * pumped_integral(p0, model.pump_rate, t0, t0 + l.bin_us);
    }
  }
  return counts;
}

Histogram simulate_histogram(const PulseSequence& seq, const RateModel& model, std::uint64_t seed,
                             const SimulationOptions& options) {
  const Layout l = layout(seq);
  Histogram h;
  h.bin_width_ns = seq.bin_width_ns;
  h.segments = l.segments;
  h.warnings = l.warnings;
  h.sequence = seq;
  h.analytic = options.analytic;

  h.counts = expected_counts(seq, model);
  const double reps = static_cast<double>(seq.repetitions);
  if (options.analytic) {
    for (auto& c : h.counts) c *= reps;
    return h;
  }
  std::mt19937_64 rng(derive_seed(seed, "histogram"));
  for (auto& c : h.counts) {
    const double mean = c * reps;
    if (mean <= 0.0) {
      c = 0.0;
      continue;
    }
    std::poisson_distribution<std::uint64_t> poisson(mean);
    c = static_cast<double>(poisson(rng));
  }
  return h;
}

namespace {

struct PulseSums {
  double signal = 0.0;
  double variance = 0.0;
};

PulseSums subtracted_window(const Histogram& hist, const Segment& s, std::size_t window_bins) {
  if (window_bins > s.bins) throw ExtractionError("extraction window is longer than the " + s.name + " pulse");
  const std::size_t tail_bins = std::max<std::size_t>(1, s.bins / 5);
  if (window_bins + tail_bins > s.bins) throw ExtractionError("extraction window overlaps the " + s.name + " tail");
  double window = 0.0, tail = 0.0;
  for (std::size_t b = 0; b < window_bins; ++b) window += hist.counts[s.first_bin + b];
  for (std::size_t b = s.bins - tail_bins; b < s.bins; ++b) tail += hist.counts[s.first_bin + b];
  const double ratio = static_cast<double>(window_bins) / static_cast<double>(tail_bins);
  return {window - ratio * tail, window + ratio * ratio * tail};
}

}  // namespace

PopulationEstimate extract_population_with_sigma(const Histogram& hist, double window_ns) {
  if (!(hist.bin_width_ns > 0.0)) throw ExtractionError("histogram bin width must be positive");
  const auto window_bins = static_cast<std::size_t>(std::llround(window_ns / hist.bin_width_ns));
  if (window_bins < 2) throw ExtractionError("extraction window must cover at least 2 bins");
  const PulseSums pump = subtracted_window(hist, hist.segment("pump"), window_bins);
  const PulseSums probe = subtracted_window(hist, hist.segment("probe"), window_bins);
  if (!(pump.signal > 0.0)) throw ExtractionError("pump initialization peak is not above background");
  const double r = probe.signal / pump.signal;
  const double var = (probe.variance + r * r * pump.variance) / (pump.signal * pump.signal);
  return {r, std::sqrt(var)};
}

double extract_population(const Histogram& hist, double window_ns) {
  return extract_population_with_sigma(hist, window_ns).value;
}

DecayCurveRun build_decay_curve(const PulseSequence& seq_template, const std::vector<double>& tau_us,
                                const RateModel& model, std::uint64_t seed, double window_ns,
                                const SimulationOptions& options) {
  if (tau_us.empty()) throw InvalidInputError("tau list is empty");
  DecayCurveRun run;
  std::vector<double> taus, pops, sigmas;
  for (std::size_t i = 0; i < tau_us.size(); ++i) {
    if (i > 0 && !(tau_us[i] > tau_us[i - 1])) throw InvalidInputError("tau list must be increasing");
    PulseSequence seq = seq_template;
    seq.wait_tau_us = tau_us[i];
    const Histogram h = simulate_histogram(seq, model, derive_seed(seed, "decay-curve", i), options);
    for (const auto& w : h.warnings) run.warnings.push_back("tau " + std::to_string(tau_us[i]) + " us: " + w);
    const PopulationEstimate p = extract_population_with_sigma(h, window_ns);
    const double tau_eff = h.segment_duration_us("wait");
    if (!taus.empty() && !(tau_eff > taus.back())) {
      throw InvalidInputError("two wait times round to the same number of bins");
    }
    taus.push_back(tau_eff);
    pops.push_back(p.value);
    sigmas.push_back(p.sigma);
  }
  bool sigma_ok = true;
  for (double s : sigmas) sigma_ok = sigma_ok && s > 0.0 && std::isfinite(s);
  run.curve = DecayCurve(std::move(taus), std::move(pops),
                         sigma_ok ? std::optional<std::vector<double>>(std::move(sigmas)) : std::nullopt);
  return run;
}

}  // namespace omcspin::sim
