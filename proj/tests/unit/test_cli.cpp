#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "omcspin/cli.hpp"
#include "omcspin/datasets.hpp"

using namespace omcspin;
using doctest::Approx;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / "omcspin_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"t1-fit"}).code == cli::kExitUsage);
  CHECK(run({"thermometry", "--omega-ghz", "abc"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("thermometry reports the thermal occupancy") {
  const auto r = run({"thermometry", "--omega-ghz", "12.06", "--temp-k", "0.150"});
  REQUIRE(r.code == 0);
  const auto j = io::Json::parse(r.out);
  CHECK(j["n_th"].get<double>() == Approx(0.0216).epsilon(0.01));
  const auto inv = run({"thermometry", "--omega-ghz", "8.3", "--p-saturation", "0.065645849383517071"});
  CHECK(io::Json::parse(inv.out)["temperature_k"].get<double>() == Approx(0.150).epsilon(1e-10));
  CHECK(run({"thermometry", "--omega-ghz", "8.3"}).code == cli::kExitData);
}

TEST_CASE("purcell-scan peaks at the mode") {
  const auto modes = write("modes.csv", "freq_ghz,q_factor,g_mhz\n12.06,344.57142857142857,0.3\n");
  const auto r = run({"purcell-scan", "--modes", modes, "--start-ghz", "11.96", "--stop-ghz", "12.16", "--points", "201"});
  REQUIRE(r.code == 0);
  const auto s = std::get<Spectrum>(io::parse_dataset(r.out, io::DatasetKind::Spectrum).payload);
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.values()[i] > s.values()[best]) best = i;
  }
  CHECK(s.abscissa()[best] == Approx(12.06).epsilon(1e-12));
  CHECK(s.values()[best] == Approx(10.2857).epsilon(1e-4));
}

TEST_CASE("calibrate recovers the slope") {
  std::string csv = "field_kg,f_uu_ghz,f_dd_ghz,f_du_ghz,f_ud_ghz\n";
  for (double b : {0.5, 1.0, 1.5, 2.0}) {
    const auto l = siv::four_lines(406700.0, 2.7 * b, 3.1 * b);
    csv += io::format_number(b) + "," + io::format_number(l.f_uu) + "," + io::format_number(l.f_dd) + "," +
           io::format_number(l.f_du) + "," + io::format_number(l.f_ud) + "\n";
  }
  const auto r = run({"calibrate", "--lines", write("lines.csv", csv)});
  REQUIRE(r.code == 0);
  CHECK(io::Json::parse(r.out)["slope_ghz_per_kg"].get<double>() == Approx(2.7).epsilon(1e-9));
}

TEST_CASE("data and fit failures map to exit codes 3 and 4") {
  CHECK(run({"t1-fit", "--decay", "/nonexistent.csv"}).code == cli::kExitData);
  CHECK(run({"t1-fit", "--decay", write("bad.csv", "tau_us,population\n2,0.1\n1,0.2\n")}).code == cli::kExitData);
  const auto flat = write("flat.csv", "tau_us,population\n1,0.5\n2,0.5\n3,0.5\n4,0.5\n5,0.5\n");
  const auto r = run({"t1-fit", "--decay", flat});
  CHECK(r.code == cli::kExitFit);
  CHECK(r.err.find("fit") != std::string::npos);
}

TEST_CASE("simulation to fit pipeline through files") {
  const auto curve = (scratch() / "curve.csv").string();
  const std::vector<std::string> sim{"--seed", "11", "--out", curve, "simulate-histogram", "--repetitions",
                                     "2000000", "--bin-ns", "20", "--taus-us", "2,20,50,100,150,200,300,400,500"};
  REQUIRE(run(sim).code == 0);
  const auto first = slurp(curve);
  REQUIRE(run(sim).code == 0);
  CHECK(slurp(curve) == first);
  const auto fit = run({"t1-fit", "--decay", curve});
  REQUIRE(fit.code == 0);
  CHECK(io::Json::parse(fit.out)["gamma_s_khz"].get<double>() == Approx(10.0).epsilon(0.03));
}

TEST_CASE("every subcommand is byte-identical across runs") {
  const auto red = write("red.csv", "# sideband: red\npower_uw,linewidth_khz\n2,370\n4,390\n6,411\n8,429\n");
  const auto blue = write("blue.csv", "# sideband: blue\npower_uw,linewidth_khz\n2,331\n4,310\n6,290\n8,271\n");
  const auto angles = write("angles.csv", "theta_deg,gamma_khz\n15,0.45\n35,2.1\n55,4.4\n75,6.1\n90,6.6\n");
  const auto refl = (scratch() / "refl.csv").string();
  REQUIRE(run({"--out", refl, "reflectance", "--omega-a-thz", "406.7005", "--points", "401"}).code == 0);
  const std::vector<std::vector<std::string>> commands{
      {"--seed", "3", "simulate-histogram", "--wait-us", "5", "--repetitions", "1000"},
      {"backaction", "--red", red, "--blue", blue},
      {"angle-fit", "--points", angles},
      {"fit-reflectance", "--spectrum", refl, "--g-so", "3.3", "--kappa", "14", "--kappa-e", "4.4", "--omega-a-thz",
       "406.7008"},
      {"--format", "json", "reflectance", "--points", "11"},
  };
  for (const auto& c : commands) {
    const auto a = run(c);
    const auto b = run(c);
    CHECK_MESSAGE(a.code == 0, c[0] << " " << a.err);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
  }
  const auto fit = io::Json::parse(run(commands[3]).out);
  CHECK(fit["g_so"].get<double>() == Approx(3.6).epsilon(1e-6));
  const auto back = io::Json::parse(run(commands[1]).out);
  CHECK(back["kappa_intrinsic_khz"].get<double>() == Approx(350.0).epsilon(0.02));
}

TEST_CASE("global flags may follow the subcommand") {
  const auto a = run({"--seed", "9", "simulate-histogram", "--wait-us", "5", "--repetitions", "100"});
  const auto b = run({"simulate-histogram", "--wait-us", "5", "--repetitions", "100", "--seed", "9"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("backaction rejects swapped sidebands") {
  const auto red = write("red2.csv", "# sideband: red\npower_uw,linewidth_khz\n2,370\n4,390\n");
  CHECK(run({"backaction", "--red", red, "--blue", red}).code == cli::kExitData);
}

TEST_CASE("config file from the environment sets seed, output dir and constants") {
  const auto dir = scratch() / "cfg_out";
  std::filesystem::remove_all(dir);
  const auto cfg = write("config.json", R"({"seed": 9, "output_dir": ")" + dir.string() +
                                            R"(", "constants": {"boltzmann": 2.761298e-23}})");
  ::setenv("OMCSPIN_CONFIG", cfg.c_str(), 1);
  const auto hist = run({"--out", "h.csv", "simulate-histogram", "--wait-us", "5", "--repetitions", "100"});
  const auto thermo = run({"thermometry", "--omega-ghz", "12.06", "--temp-k", "0.075"});
  ::setenv("OMCSPIN_CONFIG", write("broken.json", "{not json").c_str(), 1);
  const auto broken = run({"thermometry", "--temp-k", "0.3"});
  ::unsetenv("OMCSPIN_CONFIG");

  REQUIRE(hist.code == 0);
  CHECK(slurp(dir / "h.csv") == run({"--seed", "9", "simulate-histogram", "--wait-us", "5", "--repetitions", "100"}).out);
  // Doubling k_B at half the temperature leaves h f / k_B T unchanged.
  const auto reference = run({"thermometry", "--omega-ghz", "12.06", "--temp-k", "0.15"});
  CHECK(io::Json::parse(thermo.out)["n_th"].get<double>() ==
        Approx(io::Json::parse(reference.out)["n_th"].get<double>()).epsilon(1e-12));
  CHECK(broken.code == cli::kExitData);
}
