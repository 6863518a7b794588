#include "omcspin/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include "omcspin/acceptance.hpp"
#include "omcspin/cavity_optics.hpp"
#include "omcspin/datasets.hpp"
#include "omcspin/errors.hpp"
#include "omcspin/fit_core.hpp"
#include "omcspin/measurement_sim.hpp"
#include "omcspin/optomechanics.hpp"
#include "omcspin/siv_model.hpp"
#include "omcspin/spin_phonon.hpp"
#include "omcspin/thermometry.hpp"

namespace omcspin::cli {

namespace {

using io::Json;

struct Context {
  io::RunConfig config;
  std::ostream* out = nullptr;
  std::string out_path;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;

  std::uint64_t effective_seed() const { return seed.value_or(config.seed); }

  // Relative --out paths resolve against the configured output directory.
  void emit(const std::string& text) const {
    if (out_path.empty()) {
      *out << text;
      return;
    }
    std::filesystem::path p(out_path);
    if (p.is_relative()) p = std::filesystem::path(config.output_dir) / p;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    io::write_text_file(p, text);
  }
  void emit_json(const Json& j) const { emit(j.dump(2) + "\n"); }
};

template <class T>
const T& payload_as(const io::Dataset& d) {
  return std::get<T>(d.payload);
}

io::PlotFormat plot_format(const std::string& text) { return io::parse_plot_format(text); }

Json fit_json(const FitReport& r) { return io::to_json(r); }

void require_converged(const FitReport& r, const char* what) {
  if (!r.converged) throw FitFailureError(std::string(what) + " did not converge (" + r.message + ")", r.residual_norm);
}

// ---------------------------------------------------------------------------

void cmd_calibrate(const Context& ctx, const std::string& lines_path) {
  const auto d = io::load_dataset(lines_path, io::DatasetKind::FourLine);
  const auto& rows = payload_as<std::vector<io::FourLineRecord>>(d);
  std::vector<double> fields, splittings, first, second;
  for (const auto& row : rows) {
    const auto [a, b] = siv::estimate_spin_splitting(row.lines);
    fields.push_back(row.field_kg);
    first.push_back(a);
    second.push_back(b);
    splittings.push_back(0.5 * (a + b));
  }
  const auto fit = linear_fit_zero_intercept(fields, splittings);
  const auto fit_a = linear_fit_zero_intercept(fields, first);
  const auto fit_b = linear_fit_zero_intercept(fields, second);
  Json j;
  j["slope_ghz_per_kg"] = io::json_number(fit.slope);
  j["sigma_ghz_per_kg"] = io::json_number(fit.sigma);
  j["reduced_chi2"] = io::json_number(fit.reduced_chi2);
  j["points"] = fit.points;
  j["slope_f_du_minus_f_uu"] = io::json_number(fit_a.slope);
  j["slope_f_dd_minus_f_ud"] = io::json_number(fit_b.slope);
  ctx.emit_json(j);
}

struct OpticsArgs {
  double omega_o = 406.7;
  double omega_a = 406.7;
  double g_so = 3.6;
  double kappa = 15.0;
  double kappa_e = 4.0;
  double gamma_o = 0.11;

  optics::CoupledOpticalSystem system() const {
    return {optics::OpticalCavity::from_total(omega_o, kappa, kappa_e), {omega_a, gamma_o}, g_so};
  }
};

void add_optics_flags(CLI::App* sub, OpticsArgs& a) {
  sub->add_option("--omega-o-thz", a.omega_o, "cavity frequency [THz]")->capture_default_str();
  sub->add_option("--omega-a-thz", a.omega_a, "emitter frequency [THz]")->capture_default_str();
  sub->add_option("--g-so", a.g_so, "emitter-cavity coupling [GHz]")->capture_default_str();
  sub->add_option("--kappa", a.kappa, "total cavity loss rate [GHz]")->capture_default_str();
  sub->add_option("--kappa-e", a.kappa_e, "external loss rate [GHz]")->capture_default_str();
  sub->add_option("--gamma-o", a.gamma_o, "emitter linewidth [GHz]")->capture_default_str();
}

void cmd_reflectance(const Context& ctx, const OpticsArgs& a, double start, double stop, std::size_t points) {
  const auto spectrum = optics::reflectance_spectrum(a.system(), linspace(start, stop, points));
  const auto fmt = plot_format(ctx.format);
  if (fmt == io::PlotFormat::Csv) {
    ctx.emit(io::write_spectrum(spectrum, "probe_thz", "reflectance"));
  } else {
    const auto x = spectrum.abscissa();
    const auto y = spectrum.values();
    ctx.emit(io::render_plot_data({{"probe_thz", {x.begin(), x.end()}}, {"reflectance", {y.begin(), y.end()}}}, fmt));
  }
}

void cmd_fit_reflectance(const Context& ctx, const std::string& path, const OpticsArgs& init, const std::string& regime,
                         bool fix_frequencies) {
  const auto d = io::load_dataset(path, io::DatasetKind::Spectrum);
  optics::ReflectanceFitOptions options;
  options.regime = optics::parse_coupling_regime(regime);
  options.fit_frequencies = !fix_frequencies;
  options.solver = ctx.config.tolerances;
  const auto fit = optics::fit_reflectance(payload_as<Spectrum>(d), init.system(), options);
  Json j;
  j["regime"] = regime;
  j["g_so"] = io::json_number(fit.system.g_so);
  j["sigma_g_so"] = io::json_number(fit.sigma_g_so);
  j["kappa"] = io::json_number(fit.system.cavity.kappa_total());
  j["sigma_kappa"] = io::json_number(fit.sigma_kappa);
  j["kappa_e"] = io::json_number(fit.system.cavity.kappa_e());
  j["sigma_kappa_e"] = io::json_number(fit.sigma_kappa_e);
  j["gamma_o"] = io::json_number(fit.system.emitter.gamma_o);
  j["sigma_gamma_o"] = io::json_number(fit.sigma_gamma_o);
  j["omega_o_thz"] = io::json_number(fit.system.cavity.omega_o());
  j["omega_a_thz"] = io::json_number(fit.system.emitter.omega_a);
  j["cooperativity"] = io::json_number(fit.cooperativity);
  j["fit"] = fit_json(fit.report);
  ctx.emit_json(j);
}

void cmd_purcell_scan(const Context& ctx, const std::string& modes_path, double start, double stop, std::size_t points,
                      double quench, std::optional<double> q_damp) {
  const auto d = io::load_dataset(modes_path, io::DatasetKind::ModeTable);
  phonon::DecaySpectrumOptions options;
  options.quench = quench;
  options.q_damp = q_damp;
  const auto spectrum =
      phonon::broadband_decay_spectrum(payload_as<phonon::ModeTable>(d), linspace(start, stop, points), options);
  const auto fmt = plot_format(ctx.format);
  if (fmt == io::PlotFormat::Csv) {
    ctx.emit(io::write_spectrum(spectrum, "freq_ghz", "gamma_khz"));
  } else {
    const auto x = spectrum.abscissa();
    const auto y = spectrum.values();
    ctx.emit(io::render_plot_data({{"freq_ghz", {x.begin(), x.end()}}, {"gamma_khz", {y.begin(), y.end()}}}, fmt));
  }
}

void cmd_t1_fit(const Context& ctx, const std::string& path) {
  const auto d = io::load_dataset(path, io::DatasetKind::DecayCurve);
  const auto fit = fit_exponential_decay(payload_as<DecayCurve>(d), ctx.config.tolerances);
  if (fit.report.degenerate) throw FitFailureError("decay curve has no variation", fit.report.residual_norm);
  require_converged(fit.report, "exponential fit");
  Json j;
  j["gamma_s_khz"] = io::json_number(fit.gamma_khz);
  j["sigma_gamma_s_khz"] = io::json_number(fit.report.sigma("gamma_khz"));
  j["t1_us"] = io::json_number(1000.0 / fit.gamma_khz);
  j["p_inf"] = io::json_number(fit.p_inf);
  j["amplitude"] = io::json_number(fit.amplitude);
  j["fit"] = fit_json(fit.report);
  ctx.emit_json(j);
}

void cmd_simulate(const Context& ctx, const sim::PulseSequence& seq, const sim::RateModel& model, bool analytic,
                  const std::vector<double>& taus, double window_ns) {
  const sim::SimulationOptions options{analytic};
  if (taus.empty()) {
    const auto hist = sim::simulate_histogram(seq, model, ctx.effective_seed(), options);
    ctx.emit(io::write_histogram(hist));
    return;
  }
  const auto run = sim::build_decay_curve(seq, taus, model, ctx.effective_seed(), window_ns, options);
  std::string text;
  for (const auto& w : run.warnings) text += "# warning: " + w + "\n";
  ctx.emit(text + io::write_decay_curve(run.curve));
}

void cmd_thermometry(const Context& ctx, double omega, std::optional<double> temp, std::optional<double> p_sat,
                     double delta_gs) {
  if (temp.has_value() == p_sat.has_value()) {
    throw InvalidInputError("give exactly one of --temp-k and --p-saturation");
  }
  const auto& c = ctx.config.constants;
  const double t = temp ? *temp : thermo::temperature_from_saturation(*p_sat, omega, c);
  const auto pops = thermo::spin_steady_populations({t, omega}, c);
  Json j;
  j["omega_ghz"] = io::json_number(omega);
  j["temperature_k"] = io::json_number(t);
  j["p_up"] = io::json_number(pops.p_up);
  j["p_down"] = io::json_number(pops.p_down);
  j["n_th"] = io::json_number(thermo::bose_occupancy(omega, t, c));
  j["delta_gs_ghz"] = io::json_number(delta_gs);
  j["orbital_ground_fraction"] = io::json_number(thermo::orbital_ground_fraction(delta_gs, t, c));
  ctx.emit_json(j);
}

void cmd_backaction(const Context& ctx, const std::string& red_path, const std::string& blue_path) {
  const auto red = payload_as<optomech::SidebandSeries>(io::load_dataset(red_path, io::DatasetKind::SidebandSeries));
  const auto blue = payload_as<optomech::SidebandSeries>(io::load_dataset(blue_path, io::DatasetKind::SidebandSeries));
  if (red.sideband != optomech::Sideband::Red || blue.sideband != optomech::Sideband::Blue) {
    throw DataError("--red and --blue files must carry '# sideband: red' and '# sideband: blue'");
  }
  const auto fit = optomech::fit_backaction_pair(red, blue);
  Json j;
  j["kappa_intrinsic_khz"] = io::json_number(fit.kappa_intrinsic);
  j["sigma_kappa_khz"] = io::json_number(fit.sigma_kappa);
  j["slope_khz_per_uw"] = io::json_number(fit.slope);
  j["sigma_slope_khz_per_uw"] = io::json_number(fit.sigma_slope);
  j["cov_kappa_slope"] = io::json_number(fit.cov_kappa_slope);
  j["reduced_chi2"] = io::json_number(fit.reduced_chi2);
  j["lasing_threshold_uw"] = io::json_number(optomech::lasing_threshold_power(fit));
  if (fit.independent) {
    const auto& s = *fit.independent;
    j["independent"] = {{"kappa_intrinsic_khz", io::json_number(s.kappa_intrinsic)},
                        {"sigma_kappa_khz", io::json_number(s.sigma_kappa)},
                        {"slope_red_khz_per_uw", io::json_number(s.slope_red)},
                        {"sigma_red", io::json_number(s.sigma_red)},
                        {"slope_blue_khz_per_uw", io::json_number(s.slope_blue)},
                        {"sigma_blue", io::json_number(s.sigma_blue)}};
  }
  ctx.emit_json(j);
}

void cmd_angle_fit(const Context& ctx, const std::string& path) {
  const auto& points = payload_as<std::vector<AnglePoint>>(io::load_dataset(path, io::DatasetKind::AnglePoints));
  const auto fit = fit_angle_amplitude(points);
  Json j;
  j["amplitude_khz"] = io::json_number(fit.amplitude);
  j["sigma_khz"] = io::json_number(fit.sigma);
  j["points"] = points.size();
  ctx.emit_json(j);
}

int cmd_repro(const Context& ctx, std::ostream& out) {
  const auto results = acceptance::run_all(ctx.seed.value_or(acceptance::kDefaultSeed));
  std::string text;
  for (const auto& r : results) text += acceptance::format_line(r) + "\n";
  const bool ok = acceptance::all_passed(results);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed ? 1 : 0;
  text += std::string(ok ? "PASS" : "FAIL") + "  " + std::to_string(passed) + "/" + std::to_string(results.size()) +
          " criteria\n";
  if (!ctx.out_path.empty()) {
    ctx.emit(text);
    out << text;
  } else {
    out << text;
  }
  return ok ? kExitOk : kExitFailedCriteria;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
      throw InvalidInputError("bad number '" + item + "' in list");
    }
    values.push_back(v);
  }
  if (values.empty()) throw InvalidInputError("empty list");
  return values;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SiV spin cavity-QED and optomechanics toolkit", "omcspin"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  Context ctx;
  ctx.out = &out;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "64-bit seed for every random stream");
  app.add_option("--out", ctx.out_path, "output file (default: standard output)");
  app.add_option("--format", ctx.format, "plot data format: csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::function<int()> action;

  auto* calibrate = app.add_subcommand("calibrate", "four-line CSV -> Zeeman slope JSON");
  std::string lines_path;
  calibrate->add_option("--lines", lines_path, "four-line CSV")->required();
  calibrate->callback([&] { action = [&] { cmd_calibrate(ctx, lines_path); return kExitOk; }; });

  auto* reflect = app.add_subcommand("reflectance", "model parameters -> reflectance spectrum");
  OpticsArgs optics_args;
  double r_start = 406.66, r_stop = 406.74;
  std::size_t r_points = 801;
  add_optics_flags(reflect, optics_args);
  reflect->add_option("--start-thz", r_start)->capture_default_str();
  reflect->add_option("--stop-thz", r_stop)->capture_default_str();
  reflect->add_option("--points", r_points)->capture_default_str()->check(CLI::Range(2ul, 10000000ul));
  reflect->callback([&] { action = [&] { cmd_reflectance(ctx, optics_args, r_start, r_stop, r_points); return kExitOk; }; });

  auto* fit_reflect = app.add_subcommand("fit-reflectance", "fit a reflectance spectrum CSV");
  OpticsArgs init_args;
  std::string spectrum_path, regime = "under";
  bool fix_frequencies = false;
  fit_reflect->add_option("--spectrum", spectrum_path, "spectrum CSV (probe_thz,reflectance[,sigma])")->required();
  add_optics_flags(fit_reflect, init_args);
  fit_reflect->add_option("--regime", regime, "coupling regime: under or over")->capture_default_str();
  fit_reflect->add_flag("--fix-frequencies", fix_frequencies, "hold cavity and emitter frequencies at the initial values");
  fit_reflect->callback([&] {
    action = [&] { cmd_fit_reflectance(ctx, spectrum_path, init_args, regime, fix_frequencies); return kExitOk; };
  });

  auto* purcell = app.add_subcommand("purcell-scan", "mode table + grid -> decay-rate spectrum");
  std::string modes_path;
  double p_start = 11.9, p_stop = 12.2, quench = 1.0;
  std::size_t p_points = 301;
  std::optional<double> q_damp;
  purcell->add_option("--modes", modes_path, "mode-table CSV")->required();
  purcell->add_option("--start-ghz", p_start)->capture_default_str();
  purcell->add_option("--stop-ghz", p_stop)->capture_default_str();
  purcell->add_option("--points", p_points)->capture_default_str()->check(CLI::Range(2ul, 10000000ul));
  purcell->add_option("--quench", quench, "strain quenching factor")->capture_default_str();
  purcell->add_option("--q-damp", q_damp, "extra damping quality factor");
  purcell->callback([&] {
    action = [&] { cmd_purcell_scan(ctx, modes_path, p_start, p_stop, p_points, quench, q_damp); return kExitOk; };
  });

  auto* t1 = app.add_subcommand("t1-fit", "decay-curve CSV -> spin relaxation rate JSON");
  std::string decay_path;
  t1->add_option("--decay", decay_path, "decay-curve CSV")->required();
  t1->callback([&] { action = [&] { cmd_t1_fit(ctx, decay_path); return kExitOk; }; });

  auto* simulate = app.add_subcommand("simulate-histogram", "photon-counting histogram or decay curve");
  sim::PulseSequence seq;
  sim::RateModel model;
  bool analytic = false;
  std::string taus_text;
  double window_ns = 400.0;
  simulate->add_option("--repump-us", seq.repump_us)->capture_default_str();
  simulate->add_option("--pump-us", seq.pump_us)->capture_default_str();
  simulate->add_option("--wait-us", seq.wait_tau_us)->capture_default_str();
  simulate->add_option("--probe-us", seq.probe_us)->capture_default_str();
  simulate->add_option("--bin-ns", seq.bin_width_ns)->capture_default_str();
  simulate->add_option("--repetitions", seq.repetitions)->capture_default_str();
  simulate->add_option("--pump-rate", model.pump_rate, "optical pumping rate [1/us]")->capture_default_str();
  simulate->add_option("--gamma-s-khz", model.gamma_s_khz)->capture_default_str();
  simulate->add_option("--p-thermal-up", model.p_thermal_up)->capture_default_str();
  simulate->add_option("--detect-rate", model.detect_rate_max, "peak detection rate [1/us]")->capture_default_str();
  simulate->add_option("--background", model.background, "background rate [1/us]")->capture_default_str();
  simulate->add_option("--init-fidelity", model.init_fidelity)->capture_default_str();
  simulate->add_flag("--analytic", analytic, "expected counts instead of Poisson draws");
  simulate->add_option("--taus-us", taus_text, "comma-separated waits; emits a decay curve instead");
  simulate->add_option("--window-ns", window_ns, "integration window for decay curves")->capture_default_str();
  simulate->callback([&] {
    action = [&] {
      const auto taus = taus_text.empty() ? std::vector<double>{} : parse_list(taus_text);
      cmd_simulate(ctx, seq, model, analytic, taus, window_ns);
      return kExitOk;
    };
  });

  auto* thermometry = app.add_subcommand("thermometry", "populations and occupancies at a temperature");
  double omega = 12.06, delta_gs = 46.0;
  std::optional<double> temp_k, p_sat;
  thermometry->add_option("--omega-ghz", omega)->capture_default_str();
  thermometry->add_option("--temp-k", temp_k);
  thermometry->add_option("--p-saturation", p_sat, "saturated p_up; inverts to a temperature");
  thermometry->add_option("--delta-gs-ghz", delta_gs, "ground-state orbital splitting")->capture_default_str();
  thermometry->callback([&] {
    action = [&] { cmd_thermometry(ctx, omega, temp_k, p_sat, delta_gs); return kExitOk; };
  });

  auto* backaction = app.add_subcommand("backaction", "red/blue sideband series -> intrinsic linewidth");
  std::string red_path, blue_path;
  backaction->add_option("--red", red_path)->required();
  backaction->add_option("--blue", blue_path)->required();
  backaction->callback([&] { action = [&] { cmd_backaction(ctx, red_path, blue_path); return kExitOk; }; });

  auto* angle = app.add_subcommand("angle-fit", "angle points -> sin^2 amplitude");
  std::string angle_path;
  angle->add_option("--points", angle_path, "angle-points CSV")->required();
  angle->callback([&] { action = [&] { cmd_angle_fit(ctx, angle_path); return kExitOk; }; });

  auto* repro = app.add_subcommand("repro", "run the acceptance suite");
  repro->callback([&] { action = [&] { return cmd_repro(ctx, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (const char* path = std::getenv(io::kConfigEnvVar); path != nullptr && *path != '\0') {
      ctx.config = io::load_run_config(path);
    }
    if (seed_opt->count() > 0) ctx.seed = seed_value;
    return action ? action() : kExitUsage;
  } catch (const FitFailureError& e) {
    err << "fit failure: " << e.what() << "\n";
    return kExitFit;
  } catch (const Error& e) {
    err << to_string(e.kind()) << " error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace omcspin::cli
