#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "omcspin/cavity_optics.hpp"
#include "omcspin/errors.hpp"
#include "omcspin/optomechanics.hpp"
#include "omcspin/siv_model.hpp"
#include "omcspin/spin_phonon.hpp"
#include "omcspin/thermometry.hpp"

using namespace omcspin;
using doctest::Approx;

// Reference values below were evaluated independently at 30 digits
// (tests/oracles/compute_oracles.py).

TEST_SUITE("siv") {
  TEST_CASE("orbital splitting and its inverse") {
    CHECK(siv::transverse_strain_from_splitting(85.0, 46.0) == Approx(71.477269114033729).epsilon(1e-14));
    const siv::StrainProjection p{71.48 / 2.0, 0.0};
    CHECK(siv::orbital_splitting(p, 46.0) == Approx(85.002296439566855).epsilon(1e-14));
    CHECK(siv::transverse_strain_from_splitting(46.0, 46.0) == 0.0);
    CHECK_THROWS_AS(siv::transverse_strain_from_splitting(40.0, 46.0), DomainError);
  }

  TEST_CASE("strain projection is linear in the tensor") {
    siv::SivParameters params;
    params.d = 1.3e6;
    params.f = -1.7e6;
    siv::StrainTensor s;
    s.eps_xx = 2e-6;
    s.eps_yy = -1e-6;
    s.eps_xz = 4e-7;
    s.eps_xy = 3e-7;
    s.eps_yz = -5e-7;
    const auto p = siv::strain_projection(s, params);
    CHECK(p.beta == Approx(1.3e6 * 3e-6 - 1.7e6 * 4e-7));
    CHECK(p.gamma_strain == Approx(-2 * 1.3e6 * 3e-7 + 1.7e6 * 5e-7));
  }

  TEST_CASE("fine structure uses the ground and excited spin-orbit splittings") {
    const siv::SivParameters params;
    const auto fs = siv::fine_structure({}, {}, params);
    CHECK(fs.delta_gs == Approx(46.0));
    CHECK(fs.delta_es == Approx(255.0));
  }

  TEST_CASE("four lines round trip through both estimators") {
    const auto l = siv::four_lines(406700.0, 8.3, 9.1);
    const auto [a, b] = siv::estimate_spin_splitting(l);
    CHECK(a == Approx(8.3).epsilon(1e-9));
    CHECK(b == Approx(8.3).epsilon(1e-9));
    CHECK_THROWS_AS(siv::four_lines(406700.0, -1.0, 1.0), InvalidInputError);
  }

  TEST_CASE("field helpers") {
    const siv::MagneticField f{3.0, 55.0, 0.0};
    CHECK(f.perpendicular() == Approx(3.0 * std::sin(55.0 * std::numbers::pi / 180.0)));
    CHECK(siv::spin_transition_frequency(f, 2.7) == Approx(8.1));
    CHECK_THROWS_AS(siv::spin_transition_frequency(f, 0.0), InvalidInputError);
  }
}

TEST_SUITE("optics") {
  const optics::CoupledOpticalSystem kHybrid{optics::OpticalCavity::from_total(406.7, 15.0, 4.0), {406.7, 0.11}, 3.6};

  TEST_CASE("bare dip and hybrid peak") {
    auto bare = kHybrid;
    bare.g_so = 0.0;
    CHECK(optics::reflectance(bare, 406.7) == Approx(0.21777777777777778).epsilon(1e-14));
    CHECK(optics::reflectance(kHybrid, 406.7) == Approx(0.96736731113151528).epsilon(1e-13));
    // Far detuned the cavity is a mirror.
    CHECK(optics::reflectance(bare, 420.0) == Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("reflectance never exceeds one") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const double kappa = 1.0 + 30.0 * u(rng);
      const optics::CoupledOpticalSystem s{optics::OpticalCavity::from_total(406.7, kappa, kappa * u(rng) * 0.99 + 1e-3),
                                           {406.7 + 0.02 * (u(rng) - 0.5), 0.05 + u(rng)}, 10.0 * u(rng)};
      const double r = optics::reflectance(s, 406.7 + 0.05 * (u(rng) - 0.5));
      CHECK(r >= 0.0);
      CHECK(r <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("cooperativity and photon number") {
    CHECK(optics::optical_cooperativity(3.6, 15.0, 0.11) == Approx(31.418181818181818).epsilon(1e-14));
    CHECK_THROWS_AS(optics::optical_cooperativity(3.6, 0.0, 0.11), DomainError);
    const optics::OpticalCavity c(406.0, 15.0 - 1e-12, 1e-12);
    CHECK(optics::intracavity_photon_number(1.0, 406.0, c, 0.0) == Approx(1.5776359747506993e-4).epsilon(1e-9));
    CHECK_THROWS_AS(optics::intracavity_photon_number(-1.0, 406.0, c, 0.0), InvalidInputError);
  }

  TEST_CASE("cavity validation") {
    CHECK_THROWS_AS(optics::OpticalCavity(406.7, 0.0, 1.0), InvalidInputError);
    CHECK_THROWS_AS(optics::OpticalCavity::from_total(406.7, 4.0, 5.0), InvalidInputError);
    CHECK(optics::OpticalCavity::from_total(406.7, 15.0, 4.0).quality_factor() == Approx(406700.0 / 15.0));
    CHECK(optics::parse_coupling_regime("over") == optics::CouplingRegime::Over);
    CHECK_THROWS_AS(optics::parse_coupling_regime("critical"), InvalidInputError);
  }

  TEST_CASE("reflectance fit: under- and over-coupled round trips") {
    const auto grid = linspace(406.66, 406.74, 401);
    for (const auto regime : {optics::CouplingRegime::Under, optics::CouplingRegime::Over}) {
      const double ke = regime == optics::CouplingRegime::Under ? 4.0 : 11.0;
      const optics::CoupledOpticalSystem truth{optics::OpticalCavity::from_total(406.7, 15.0, ke), {406.7004, 0.11},
                                               3.6};
      const optics::CoupledOpticalSystem init{optics::OpticalCavity::from_total(406.7002, 14.0, ke * 1.1),
                                              {406.7006, 0.12}, 3.3};
      const auto fit = optics::fit_reflectance(optics::reflectance_spectrum(truth, grid), init, {regime});
      CHECK(fit.system.g_so == Approx(3.6).epsilon(1e-7));
      CHECK(fit.system.cavity.kappa_e() == Approx(ke).epsilon(1e-7));
      CHECK(fit.cooperativity == Approx(optics::optical_cooperativity(3.6, 15.0, 0.11)).epsilon(1e-6));
    }
  }

  TEST_CASE("bare-cavity fit and failure modes") {
    const auto grid = linspace(406.66, 406.74, 201);
    optics::CoupledOpticalSystem bare{optics::OpticalCavity::from_total(406.7, 15.0, 4.0), {406.7, 0.11}, 0.0};
    const auto spectrum = optics::reflectance_spectrum(bare, grid);
    optics::CoupledOpticalSystem init{optics::OpticalCavity::from_total(406.701, 12.0, 3.0), {406.7, 0.11}, 0.0};
    const auto fit = optics::fit_reflectance(spectrum, init);
    CHECK(fit.system.cavity.kappa_total() == Approx(15.0).epsilon(1e-8));
    CHECK(fit.system.cavity.kappa_e() == Approx(4.0).epsilon(1e-8));

    CHECK_THROWS_AS(optics::fit_reflectance(Spectrum(grid, std::vector<double>(grid.size(), 1.0)), init),
                    FitFailureError);
    const auto narrow = linspace(406.7, 406.701, 20);
    CHECK_THROWS_AS(optics::fit_reflectance(optics::reflectance_spectrum(bare, narrow), init), InvalidInputError);
  }
}

TEST_SUITE("spin-phonon") {
  const phonon::MechanicalMode kMode{12.06, 12060.0 / 35.0, 0.0, std::nullopt};

  TEST_CASE("purcell rate oracles") {
    CHECK(phonon::purcell_rate(0.2806, kMode, 12.06, 1.0) == Approx(9.9984411428571429).epsilon(1e-12));
    CHECK(phonon::purcell_rate(0.2806, kMode, 12.16, 1.0) == Approx(1.2673884875682232).epsilon(1e-10));
  }

  TEST_CASE("inversion") {
    CHECK(phonon::infer_g_sm(10.0, 1.0, 35.0) == Approx(0.2806243040080456).epsilon(1e-14));
    CHECK_THROWS_AS(phonon::infer_g_sm(1.0, 1.0, 35.0), DomainError);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int i = 0; i < 50; ++i) {
      const double g = u(rng), base = u(rng);
      const double on = phonon::purcell_rate(g, kMode, kMode.omega_q, base);
      CHECK(phonon::infer_g_sm(on, base, kMode.linewidth_mhz()) == Approx(g).epsilon(1e-11));
    }
  }

  TEST_CASE("cooperativities") {
    const auto c = phonon::spin_mechanical_cooperativities(0.3, 35.0, {12.06, 1.0, 1.0});
    CHECK(c.c_t1 == Approx(10.285714285714286).epsilon(1e-14));
    CHECK(c.c_t2_star == Approx(0.010285714285714286).epsilon(1e-14));
  }

  TEST_CASE("coupling from strain") {
    siv::SivParameters params;
    params.gyro = 2.5;
    CHECK(phonon::g_sm_from_strain({0.00069, 0.0}, 4.0, params) == Approx(0.3).epsilon(1e-14));
    CHECK(phonon::g_sm_on_resonance(12.0, {0.0, 0.000813}, params) == Approx(0.29993625031547642).epsilon(1e-14));
  }

  TEST_CASE("quenching, damping and angle scaling") {
    CHECK(phonon::strain_quenching_factor(85.0, 46.0) == Approx(0.54117647058823529).epsilon(1e-15));
    CHECK(phonon::effective_quality_factor(2.4e5, 350.0) == Approx(349.49032660703141).epsilon(1e-14));
    CHECK(phonon::angle_scaling(55.0, 1.0) == Approx(0.67101007166283437).epsilon(1e-15));
    CHECK(phonon::angle_scaling(0.0, 5.0) == 0.0);
  }

  TEST_CASE("decay spectrum sums modes and applies quench and damping") {
    const phonon::MechanicalMode a{12.0, 12000.0 / 35.0, 0.3, std::nullopt};
    const phonon::MechanicalMode b{12.5, 1e5, 0.2, std::nullopt};
    const std::vector<double> grid{12.0, 12.25, 12.5};
    const auto s = phonon::broadband_decay_spectrum(phonon::ModeTable({a, b}), grid);
    const double at_a = phonon::purcell_rate(0.3, a, 12.0, 0.0) + phonon::purcell_rate(0.2, b, 12.0, 0.0);
    CHECK(s.values()[0] == Approx(at_a).epsilon(1e-13));

    phonon::DecaySpectrumOptions opt;
    opt.quench = 0.5;
    const auto q = phonon::broadband_decay_spectrum(phonon::ModeTable({a}), {12.0}, opt);
    CHECK(q.values()[0] == Approx(0.25 * phonon::purcell_rate(0.3, a, 12.0, 0.0)).epsilon(1e-13));

    opt.quench = 1.0;
    opt.q_damp = 350.0;
    const auto d = phonon::broadband_decay_spectrum(phonon::ModeTable({b}), {12.5}, opt);
    phonon::MechanicalMode damped = b;
    damped.q_factor = phonon::effective_quality_factor(b.q_factor, 350.0);
    CHECK(d.values()[0] == Approx(phonon::purcell_rate(0.2, damped, 12.5, 0.0)).epsilon(1e-12));
  }

  TEST_CASE("mode table ordering") {
    const phonon::MechanicalMode a{12.0, 100.0, 0.1, std::nullopt}, b{11.0, 100.0, 0.1, std::nullopt};
    CHECK_THROWS_AS(phonon::ModeTable({a, b}), InvalidInputError);
    CHECK(phonon::ModeTable::sorted({a, b}).modes().front().omega_q == 11.0);
    CHECK_THROWS_AS(phonon::ModeTable::sorted({a, a}), InvalidInputError);
  }
}

TEST_SUITE("thermometry") {
  TEST_CASE("populations and occupancies") {
    CHECK(thermo::spin_steady_populations({0.150, 8.3}).p_up == Approx(0.065645849383517071).epsilon(1e-13));
    CHECK(thermo::spin_steady_populations({0.150, 2.8}).p_up == Approx(0.28990227725415296).epsilon(1e-13));
    CHECK(thermo::bose_occupancy(12.06, 0.150) == Approx(0.02155240219749561).epsilon(1e-13));
    CHECK(thermo::orbital_ground_fraction(85.0, 0.885) == Approx(0.99014080365123228).epsilon(1e-14));
    const auto p = thermo::spin_steady_populations({0.1, 5.0});
    CHECK(p.p_up + p.p_down == Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("saturation inversion") {
    CHECK(thermo::temperature_from_saturation(0.065645849383517071, 8.3) == Approx(0.150).epsilon(1e-12));
    CHECK_THROWS(thermo::temperature_from_saturation(0.5, 8.3));
    CHECK_THROWS(thermo::temperature_from_saturation(0.0, 8.3));
  }

  TEST_CASE("orbital freeze-out temperature") {
    const double t = thermo::orbital_freeze_out_temperature(85.0);
    CHECK(std::abs(t - 0.88775847973623685) <= 1e-4);
    CHECK(thermo::orbital_ground_fraction(85.0, 0.885) >= 0.99);
  }

  TEST_CASE("constants overrides propagate") {
    PhysicalConstants c = kCodata;
    c.boltzmann *= 2.0;
    CHECK(thermo::bose_occupancy(12.06, 0.075, c) == Approx(thermo::bose_occupancy(12.06, 0.150)).epsilon(1e-14));
  }
}

TEST_SUITE("optomechanics") {
  TEST_CASE("thermal noise spectrum: FWHM and windowed area") {
    const phonon::MechanicalMode m{5.0, 5000.0, 0.0, std::nullopt};  // 1 MHz linewidth
    const double kappa = 1e-3;
    const auto half = optomech::thermal_npsd(m, 2.0, 0.5, {5.0 - kappa / 2, 5.0, 5.0 + kappa / 2});
    CHECK(half.values()[1] == Approx(2.5));
    CHECK(half.values()[0] == Approx(1.5).epsilon(1e-12));
    CHECK(half.values()[2] == Approx(1.5).epsilon(1e-12));

    // Trapezoid over +-20 kappa captures 2 atan(40)/pi of pi A kappa / 2.
    const auto grid = linspace(5.0 - 20 * kappa, 5.0 + 20 * kappa, 40001);
    const auto s = optomech::thermal_npsd(m, 2.0, 0.0, grid);
    double area = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) area += 0.5 * (s.values()[i] + s.values()[i - 1]) * (grid[i] - grid[i - 1]);
    const double full = std::numbers::pi * 2.0 * kappa / 2.0;
    CHECK(area / full == Approx(0.98408782017594837).epsilon(1e-7));
  }

  TEST_CASE("backaction linewidth and lasing") {
    CHECK(optomech::backaction_linewidth(10.0, optomech::Sideband::Red, 350.0, 10.0).linewidth_khz == Approx(450.0));
    const auto b = optomech::backaction_linewidth(40.0, optomech::Sideband::Blue, 350.0, 10.0);
    CHECK(b.linewidth_khz == 0.0);
    CHECK(b.lasing);
    CHECK(optomech::parse_sideband("blue") == optomech::Sideband::Blue);
    CHECK_THROWS_AS(optomech::parse_sideband("green"), InvalidInputError);
  }

  TEST_CASE("joint fit with shared and independent slopes") {
    optomech::SidebandSeries red{optomech::Sideband::Red, {}}, blue{optomech::Sideband::Blue, {}};
    for (double p : {2.0, 4.0, 6.0, 8.0}) {
      red.points.push_back({p, 350.0 + 12.0 * p, 5.0});
      blue.points.push_back({p, 350.0 - 8.0 * p, 5.0});
    }
    const auto fit = optomech::fit_backaction_pair(red, blue);
    REQUIRE(fit.independent.has_value());
    CHECK(fit.independent->kappa_intrinsic == Approx(350.0).epsilon(1e-12));
    CHECK(fit.independent->slope_red == Approx(12.0).epsilon(1e-12));
    CHECK(fit.independent->slope_blue == Approx(8.0).epsilon(1e-12));
    CHECK(fit.slope > 8.0);
    CHECK(fit.slope < 12.0);
    CHECK(optomech::lasing_threshold_power(fit) == Approx(fit.kappa_intrinsic / fit.slope));
  }

  TEST_CASE("series validation") {
    optomech::SidebandSeries one{optomech::Sideband::Red, {{1.0, 10.0, std::nullopt}}};
    CHECK_THROWS_AS(one.validate(), InvalidInputError);
  }
}
