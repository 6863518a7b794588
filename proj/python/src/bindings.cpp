#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "omcspin/acceptance.hpp"
#include "omcspin/cavity_optics.hpp"
#include "omcspin/cli.hpp"
#include "omcspin/errors.hpp"
#include "omcspin/fit_core.hpp"
#include "omcspin/measurement_sim.hpp"
#include "omcspin/optomechanics.hpp"
#include "omcspin/siv_model.hpp"
#include "omcspin/spin_phonon.hpp"
#include "omcspin/thermometry.hpp"

namespace py = pybind11;
using namespace omcspin;

namespace {

py::tuple spectrum_tuple(const Spectrum& s) {
  const auto x = s.abscissa();
  const auto y = s.values();
  return py::make_tuple(std::vector<double>(x.begin(), x.end()), std::vector<double>(y.begin(), y.end()));
}

py::dict report_dict(const FitReport& r) {
  py::dict params, sigmas;
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    params[py::str(r.names[i])] = r.values[i];
    sigmas[py::str(r.names[i])] = r.sigmas[i];
  }
  py::dict d;
  d["params"] = params;
  d["sigmas"] = sigmas;
  d["residual_norm"] = r.residual_norm;
  d["reduced_chi2"] = r.reduced_chi2;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  return d;
}

optics::CoupledOpticalSystem make_system(double omega_o, double kappa, double kappa_e, double omega_a, double gamma_o,
                                         double g_so) {
  return {optics::OpticalCavity::from_total(omega_o, kappa, kappa_e), {omega_a, gamma_o}, g_so};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SiV spin cavity-QED and optomechanics toolkit";

  auto base = py::register_exception<Error>(m, "OmcspinError", PyExc_RuntimeError);
  py::register_exception<InvalidInputError>(m, "InvalidInputError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<FitFailureError>(m, "FitFailureError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ExtractionError>(m, "ExtractionError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  // cavity optics
  m.def("optical_cooperativity", &optics::optical_cooperativity, py::arg("g_so"), py::arg("kappa"), py::arg("gamma_o"));
  m.def(
      "reflectance_spectrum",
      [](const std::vector<double>& probe_thz, double omega_o, double kappa, double kappa_e, double omega_a,
         double gamma_o, double g_so) {
        return spectrum_tuple(
            optics::reflectance_spectrum(make_system(omega_o, kappa, kappa_e, omega_a, gamma_o, g_so), probe_thz));
      },
      py::arg("probe_thz"), py::arg("omega_o"), py::arg("kappa"), py::arg("kappa_e"), py::arg("omega_a"),
      py::arg("gamma_o"), py::arg("g_so"));
  m.def(
      "fit_reflectance",
      [](const std::vector<double>& probe_thz, const std::vector<double>& reflectance, double omega_o, double kappa,
         double kappa_e, double omega_a, double gamma_o, double g_so, const std::string& regime) {
        optics::ReflectanceFitOptions options;
        options.regime = optics::parse_coupling_regime(regime);
        const auto fit = optics::fit_reflectance(Spectrum(probe_thz, reflectance),
                                                 make_system(omega_o, kappa, kappa_e, omega_a, gamma_o, g_so), options);
        py::dict d;
        d["g_so"] = fit.system.g_so;
        d["kappa"] = fit.system.cavity.kappa_total();
        d["kappa_e"] = fit.system.cavity.kappa_e();
        d["gamma_o"] = fit.system.emitter.gamma_o;
        d["omega_o"] = fit.system.cavity.omega_o();
        d["omega_a"] = fit.system.emitter.omega_a;
        d["cooperativity"] = fit.cooperativity;
        d["sigma_g_so"] = fit.sigma_g_so;
        d["sigma_kappa"] = fit.sigma_kappa;
        d["sigma_kappa_e"] = fit.sigma_kappa_e;
        d["sigma_gamma_o"] = fit.sigma_gamma_o;
        d["report"] = report_dict(fit.report);
        return d;
      },
      py::arg("probe_thz"), py::arg("reflectance"), py::arg("omega_o"), py::arg("kappa"), py::arg("kappa_e"),
      py::arg("omega_a"), py::arg("gamma_o"), py::arg("g_so"), py::arg("regime") = "under");

  // spin-phonon
  m.def("infer_g_sm", &phonon::infer_g_sm, py::arg("gamma_on_khz"), py::arg("gamma_off_khz"), py::arg("kappa_m_mhz"));
  m.def(
      "purcell_rate",
      [](double g_sm_mhz, double omega_q, double q_factor, double omega_s, double baseline_khz) {
        return phonon::purcell_rate(g_sm_mhz, {omega_q, q_factor, 0.0, std::nullopt}, omega_s, baseline_khz);
      },
      py::arg("g_sm_mhz"), py::arg("omega_q_ghz"), py::arg("q_factor"), py::arg("omega_s_ghz"),
      py::arg("baseline_khz") = 0.0);
  m.def(
      "decay_spectrum",
      [](const std::vector<std::tuple<double, double, double>>& modes, const std::vector<double>& grid_ghz,
         double quench, std::optional<double> q_damp) {
        std::vector<phonon::MechanicalMode> table;
        for (const auto& [w, q, g] : modes) table.push_back({w, q, g, std::nullopt});
        phonon::DecaySpectrumOptions options;
        options.quench = quench;
        options.q_damp = q_damp;
        return spectrum_tuple(phonon::broadband_decay_spectrum(phonon::ModeTable::sorted(table), grid_ghz, options));
      },
      py::arg("modes"), py::arg("grid_ghz"), py::arg("quench") = 1.0, py::arg("q_damp") = py::none());
  m.def(
      "cooperativities",
      [](double g_sm_mhz, double kappa_m_mhz, double gamma_s_khz, double gamma_star_mhz) {
        const auto c = phonon::spin_mechanical_cooperativities(g_sm_mhz, kappa_m_mhz, {0.0, gamma_s_khz, gamma_star_mhz});
        return py::make_tuple(c.c_t1, c.c_t2_star);
      },
      py::arg("g_sm_mhz"), py::arg("kappa_m_mhz"), py::arg("gamma_s_khz"), py::arg("gamma_star_mhz"));
  m.def("strain_quenching_factor", &phonon::strain_quenching_factor, py::arg("delta_gs"), py::arg("lambda_so"));
  m.def("transverse_strain_from_splitting", &siv::transverse_strain_from_splitting, py::arg("delta"),
        py::arg("lambda_so"));

  // thermometry
  m.def(
      "spin_populations",
      [](double omega_ghz, double temperature_k) {
        const auto p = thermo::spin_steady_populations({temperature_k, omega_ghz});
        return py::make_tuple(p.p_up, p.p_down);
      },
      py::arg("omega_ghz"), py::arg("temperature_k"));
  m.def(
      "temperature_from_saturation",
      [](double p, double omega) { return thermo::temperature_from_saturation(p, omega); }, py::arg("p_up"),
      py::arg("omega_ghz"));
  m.def(
      "bose_occupancy", [](double omega, double t) { return thermo::bose_occupancy(omega, t); }, py::arg("omega_ghz"),
      py::arg("temperature_k"));
  m.def(
      "orbital_ground_fraction", [](double delta, double t) { return thermo::orbital_ground_fraction(delta, t); },
      py::arg("delta_gs_ghz"), py::arg("temperature_k"));

  // fitting
  m.def(
      "fit_lorentzian",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto f = fit_lorentzian_peak(Spectrum(x, y));
        return report_dict(f.report);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "fit_exponential_decay",
      [](const std::vector<double>& tau_us, const std::vector<double>& population) {
        return report_dict(fit_exponential_decay(DecayCurve(tau_us, population)).report);
      },
      py::arg("tau_us"), py::arg("population"));
  m.def(
      "fit_backaction",
      [](const std::vector<double>& red_power, const std::vector<double>& red_lw, const std::vector<double>& blue_power,
         const std::vector<double>& blue_lw) {
        auto build = [](optomech::Sideband s, const std::vector<double>& p, const std::vector<double>& lw) {
          if (p.size() != lw.size()) throw InvalidInputError("power and linewidth lengths differ");
          optomech::SidebandSeries series{s, {}};
          for (std::size_t i = 0; i < p.size(); ++i) series.points.push_back({p[i], lw[i], std::nullopt});
          return series;
        };
        const auto fit = optomech::fit_backaction_pair(build(optomech::Sideband::Red, red_power, red_lw),
                                                       build(optomech::Sideband::Blue, blue_power, blue_lw));
        return py::make_tuple(fit.kappa_intrinsic, fit.slope, fit.sigma_kappa, fit.sigma_slope);
      },
      py::arg("red_power_uw"), py::arg("red_linewidth_khz"), py::arg("blue_power_uw"), py::arg("blue_linewidth_khz"));

  // measurement simulation
  m.def(
      "simulate_decay_curve",
      [](const std::vector<double>& taus, double gamma_s_khz, double p_thermal_up, std::uint64_t repetitions,
         std::uint64_t seed, bool analytic, double window_ns) {
        sim::PulseSequence seq;
        seq.repetitions = repetitions;
        sim::RateModel model;
        model.gamma_s_khz = gamma_s_khz;
        model.p_thermal_up = p_thermal_up;
        const auto run = sim::build_decay_curve(seq, taus, model, seed, window_ns, {analytic});
        const auto t = run.curve.tau_us();
        const auto p = run.curve.population();
        return py::make_tuple(std::vector<double>(t.begin(), t.end()), std::vector<double>(p.begin(), p.end()));
      },
      py::arg("tau_us"), py::arg("gamma_s_khz"), py::arg("p_thermal_up") = 0.0, py::arg("repetitions") = 100000,
      py::arg("seed") = 0, py::arg("analytic") = false, py::arg("window_ns") = 400.0);

  // acceptance and CLI
  m.def(
      "run_acceptance",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& r : acceptance::run_all(seed)) out.append(py::make_tuple(r.id, r.title, r.passed, r.detail));
        return out;
      },
      py::arg("seed") = acceptance::kDefaultSeed);
  m.def(
      "run_command",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run_command(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
