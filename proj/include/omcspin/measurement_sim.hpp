#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "omcspin/series.hpp"

namespace omcspin::sim {

/// Repump / pump / wait / probe timing. Durations in us, bins in ns. Each
/// segment is rounded down to whole bins.
struct PulseSequence {
  double repump_us = 5.0;
  double pump_us = 10.0;
  double wait_tau_us = 1.0;
  double probe_us = 10.0;
  double bin_width_ns = 10.0;
  std::uint64_t repetitions = 100000;

  void validate() const;
};

/// Two-level rate model of the spin under optical pumping on the
/// down-down' line. Rates per us except gamma_s (kHz).
struct RateModel {
  double pump_rate = 2.0;
  double gamma_s_khz = 10.0;
  double p_thermal_up = 0.0;
  double detect_rate_max = 0.05;
  double background = 0.001;
  double init_fidelity = 1.0;

  void validate() const;
};

struct Segment {
  std::string name;  // repump, pump, wait, probe
  std::size_t first_bin = 0;
  std::size_t bins = 0;
};

struct Histogram {
  double bin_width_ns = 0.0;
  std::vector<double> counts;  // integral unless simulated in analytic mode
  std::vector<Segment> segments;
  std::vector<std::string> warnings;
  std::optional<PulseSequence> sequence;
  bool analytic = false;

  const Segment& segment(const std::string& name) const;
  double segment_duration_us(const std::string& name) const;
};

struct SimulationOptions {
  bool analytic = false;  // expectations instead of Poisson draws
};

/// Photon-detection histogram accumulated over all repetitions. Identical
/// (sequence, model, seed) gives identical output. Bin counts are drawn as a
/// single Poisson variate with the repetition-summed mean.
Histogram simulate_histogram(const PulseSequence& seq, const RateModel& model, std::uint64_t seed,
                             const SimulationOptions& options = {});

/// Expected per-repetition counts of every bin.
std::vector<double> expected_counts(const PulseSequence& seq, const RateModel& model);

/// p_down at time t (us) from the start of the repump pulse, using the
/// bin-rounded segment durations.
double population_down(const PulseSequence& seq, const RateModel& model, double t_us);

struct PopulationEstimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// Background-subtracted ratio of the probe and pump initial-window counts.
/// The background of each pulse is the mean of its last 20 % of bins.
/// Throws ExtractionError when the pump peak is not above background.
PopulationEstimate extract_population_with_sigma(const Histogram& hist, double window_ns);
double extract_population(const Histogram& hist, double window_ns);

struct DecayCurveRun {
  DecayCurve curve;
  std::vector<std::string> warnings;
};

/// Simulate and extract one point per wait time. Each tau gets its own seed
/// stream; the recorded tau is the bin-rounded wait actually simulated.
DecayCurveRun build_decay_curve(const PulseSequence& seq_template, const std::vector<double>& tau_us,
                                const RateModel& model, std::uint64_t seed, double window_ns,
                                const SimulationOptions& options = {});

}  // namespace omcspin::sim
