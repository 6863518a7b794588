#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "omcspin/constants.hpp"
#include "omcspin/fit_core.hpp"
#include "omcspin/measurement_sim.hpp"
#include "omcspin/optomechanics.hpp"
#include "omcspin/series.hpp"
#include "omcspin/siv_model.hpp"
#include "omcspin/spin_phonon.hpp"

namespace omcspin::io {

using Json = nlohmann::ordered_json;

enum class DatasetKind { ModeTable, Spectrum, DecayCurve, Histogram, SidebandSeries, FourLine, AnglePoints };

DatasetKind parse_dataset_kind(const std::string& text);
const char* to_string(DatasetKind kind);

/// One row of the four-line calibration file (field in kG, lines in GHz).
struct FourLineRecord {
  double field_kg = 0.0;
  siv::FourLineSpectrum lines;
};

using DatasetPayload = std::variant<phonon::ModeTable, Spectrum, DecayCurve, sim::Histogram, optomech::SidebandSeries,
                                    std::vector<FourLineRecord>, std::vector<AnglePoint>>;

struct Dataset {
  DatasetKind kind = DatasetKind::Spectrum;
  DatasetPayload payload;
  std::string provenance;                       // "# provenance:" comment, if any
  std::map<std::string, std::string> metadata;  // every "# key: value" comment
  std::vector<std::string> columns;
};

/// Parses and schema-checks a CSV file. Throws DataError naming the first
/// offending line, IoError when the file cannot be read.
Dataset load_dataset(const std::filesystem::path& path, DatasetKind kind);
Dataset parse_dataset(const std::string& text, DatasetKind kind);

std::string format_number(double v);

std::string write_mode_table(const phonon::ModeTable& table);
std::string write_spectrum(const Spectrum& spectrum, const std::string& x_column, const std::string& y_column,
                           const std::string& sigma_column = "sigma");
std::string write_decay_curve(const DecayCurve& curve);
std::string write_histogram(const sim::Histogram& hist);
std::string write_sideband_series(const optomech::SidebandSeries& series);
std::string write_four_lines(const std::vector<FourLineRecord>& rows);
std::string write_angle_points(const std::vector<AnglePoint>& points);

struct PlotSeries {
  std::string name;
  std::vector<double> values;
};

enum class PlotFormat { Csv, Json };
PlotFormat parse_plot_format(const std::string& text);

/// Column-aligned CSV (equal lengths required) or a JSON object of arrays.
std::string render_plot_data(const std::vector<PlotSeries>& series, PlotFormat format);
void emit_plot_data(const std::vector<PlotSeries>& series, const std::filesystem::path& path, PlotFormat format);

void write_text_file(const std::filesystem::path& path, const std::string& text);

/// NaN and infinities become null.
Json json_number(double v);
Json to_json(const FitReport& report);

struct RunConfig {
  PhysicalConstants constants{};
  siv::SivParameters siv{};
  LeastSquaresOptions tolerances{};
  std::string output_dir = ".";
  std::uint64_t seed = 0;

  void validate() const;
};

/// Missing keys keep their defaults.
RunConfig parse_run_config(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);

inline constexpr const char* kConfigEnvVar = "OMCSPIN_CONFIG";

}  // namespace omcspin::io
