#include "omcspin/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "omcspin/errors.hpp"

namespace omcspin::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& field, std::size_t line, const std::string& column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw DataError("column '" + column + "': cannot parse '" + field + "' as a number", line);
  }
  if (!std::isfinite(v)) throw DataError("column '" + column + "': value must be finite", line);
  return v;
}

struct Row {
  std::size_t line = 0;
  std::vector<double> values;  // one per present column; optional columns may be absent
};

struct Table {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> columns;
  std::vector<Row> rows;
};

// Reads a CSV whose header must equal `required` followed by any prefix of
// `optional`.
Table read_table(const std::string& text, const std::vector<std::string>& required,
                 const std::vector<std::string>& optional = {}) {
  Table t;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    if (line_no == 1 && raw.size() >= 3 && raw.compare(0, 3, "\xEF\xBB\xBF") == 0) raw.erase(0, 3);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string body = trim(std::string_view(line).substr(1));
      const auto colon = body.find(':');
      if (colon != std::string::npos) {
        const std::string key = trim(std::string_view(body).substr(0, colon));
        const std::string value = trim(std::string_view(body).substr(colon + 1));
        if (t.metadata.count(key)) {
          t.metadata[key] += "\n" + value;
        } else {
          t.metadata[key] = value;
        }
      }
      continue;
    }
    auto fields = split(line);
    if (!have_header) {
      have_header = true;
      const std::size_t n = fields.size();
      bool ok = n >= required.size() && n <= required.size() + optional.size();
      for (std::size_t i = 0; ok && i < n; ++i) {
        const std::string& expected = i < required.size() ? required[i] : optional[i - required.size()];
        ok = fields[i] == expected;
      }
      if (!ok) {
        std::string want;
        for (const auto& c : required) want += (want.empty() ? "" : ",") + c;
        for (const auto& c : optional) want += "[," + c + "]";
        throw DataError("header must be '" + want + "', got '" + line + "'", line_no);
      }
      t.columns = std::move(fields);
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw DataError("expected " + std::to_string(t.columns.size()) + " columns, got " + std::to_string(fields.size()),
                      line_no);
    }
    Row row;
    row.line = line_no;
    for (std::size_t i = 0; i < fields.size(); ++i) row.values.push_back(parse_double(fields[i], line_no, t.columns[i]));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw DataError("no header");
  if (t.rows.empty()) throw DataError("no rows");
  return t;
}

void require_increasing(const Table& t, std::size_t column, const char* what) {
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    if (!(t.rows[i].values[column] > t.rows[i - 1].values[column])) {
      throw DataError(std::string(what) + " must be strictly increasing", t.rows[i].line);
    }
  }
}

void require_positive(const Row& r, std::size_t column, const char* what) {
  if (!(r.values[column] > 0.0)) throw DataError(std::string(what) + " must be positive", r.line);
}

Dataset make(DatasetKind kind, DatasetPayload payload, const Table& t) {
  Dataset d;
  d.kind = kind;
  d.payload = std::move(payload);
  d.metadata = t.metadata;
  d.columns = t.columns;
  if (auto it = t.metadata.find("provenance"); it != t.metadata.end()) d.provenance = it->second;
  return d;
}

double metadata_number(const Table& t, const std::string& key) {
  const auto it = t.metadata.find(key);
  if (it == t.metadata.end()) throw DataError("missing '# " + key + ":' header comment");
  return parse_double(it->second, 0, key);
}

Dataset parse_histogram(const std::string& text) {
  Table t = read_table(text, {"bin_start_ns", "counts"});
  sim::Histogram h;
  h.bin_width_ns = metadata_number(t, "bin_width_ns");
  if (!(h.bin_width_ns > 0.0)) throw DataError("bin_width_ns must be positive");
  require_increasing(t, 0, "bin_start_ns");
  for (const auto& r : t.rows) {
    if (r.values[1] < 0.0) throw DataError("counts must be non-negative", r.line);
    h.counts.push_back(r.values[1]);
  }
  const auto seg = t.metadata.find("segment");
  if (seg == t.metadata.end()) throw DataError("missing '# segment:' pulse markers");
  std::istringstream lines(seg->second);
  std::string entry;
  while (std::getline(lines, entry)) {
    std::istringstream fields(entry);
    sim::Segment s;
    if (!(fields >> s.name >> s.first_bin >> s.bins)) throw DataError("malformed segment marker '" + entry + "'");
    if (s.first_bin + s.bins > h.counts.size()) throw DataError("segment '" + s.name + "' runs past the last bin");
    h.segments.push_back(s);
  }
  if (auto it = t.metadata.find("analytic"); it != t.metadata.end()) h.analytic = it->second == "true";
  if (auto it = t.metadata.find("warning"); it != t.metadata.end()) {
    std::istringstream w(it->second);
    for (std::string line; std::getline(w, line);) h.warnings.push_back(line);
  }
  if (t.metadata.count("pump_us")) {
    sim::PulseSequence seq;
    seq.repump_us = metadata_number(t, "repump_us");
    seq.pump_us = metadata_number(t, "pump_us");
    seq.wait_tau_us = metadata_number(t, "wait_tau_us");
    seq.probe_us = metadata_number(t, "probe_us");
    seq.bin_width_ns = h.bin_width_ns;
    seq.repetitions = static_cast<std::uint64_t>(metadata_number(t, "repetitions"));
    h.sequence = seq;
  }
  return make(DatasetKind::Histogram, std::move(h), t);
}

}  // namespace

DatasetKind parse_dataset_kind(const std::string& text) {
  if (text == "mode-table") return DatasetKind::ModeTable;
  if (text == "spectrum") return DatasetKind::Spectrum;
  if (text == "decay-curve") return DatasetKind::DecayCurve;
  if (text == "histogram") return DatasetKind::Histogram;
  if (text == "sideband-series") return DatasetKind::SidebandSeries;
  if (text == "four-line") return DatasetKind::FourLine;
  if (text == "angle-points") return DatasetKind::AnglePoints;
  throw InvalidInputError("unknown dataset kind '" + text + "'");
}

const char* to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::ModeTable: return "mode-table";
    case DatasetKind::Spectrum: return "spectrum";
    case DatasetKind::DecayCurve: return "decay-curve";
    case DatasetKind::Histogram: return "histogram";
    case DatasetKind::SidebandSeries: return "sideband-series";
    case DatasetKind::FourLine: return "four-line";
    case DatasetKind::AnglePoints: return "angle-points";
  }
  return "unknown";
}

Dataset parse_dataset(const std::string& text, DatasetKind kind) {
  switch (kind) {
    case DatasetKind::ModeTable: {
      Table t = read_table(text, {"freq_ghz", "q_factor", "g_mhz"}, {"g_om_mhz"});
      require_increasing(t, 0, "freq_ghz");
      std::vector<phonon::MechanicalMode> modes;
      for (const auto& r : t.rows) {
        require_positive(r, 0, "freq_ghz");
        require_positive(r, 1, "q_factor");
        phonon::MechanicalMode m{r.values[0], r.values[1], r.values[2], std::nullopt};
        if (r.values.size() > 3) m.g_om = r.values[3];
        modes.push_back(m);
      }
      return make(kind, phonon::ModeTable(std::move(modes)), t);
    }
    case DatasetKind::Spectrum: {
      // Generic two- or three-column series; the header names are kept as units.
      std::istringstream in(text);
      std::string raw, header;
      while (std::getline(in, raw)) {
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        header = line;
        break;
      }
      auto names = split(header);
      if (names.size() < 2 || names.size() > 3) throw DataError("spectrum header must have 2 or 3 columns");
      std::vector<std::string> required{names[0], names[1]};
      std::vector<std::string> optional;
      if (names.size() == 3) optional.push_back(names[2]);
      Table t = read_table(text, required, optional);
      require_increasing(t, 0, names[0].c_str());
      std::vector<double> x, y, s;
      for (const auto& r : t.rows) {
        x.push_back(r.values[0]);
        y.push_back(r.values[1]);
        if (r.values.size() > 2) {
          require_positive(r, 2, names[2].c_str());
          s.push_back(r.values[2]);
        }
      }
      std::optional<std::vector<double>> sig;
      if (names.size() == 3) sig = std::move(s);
      return make(kind, Spectrum(std::move(x), std::move(y), std::move(sig), names[0], names[1]), t);
    }
    case DatasetKind::DecayCurve: {
      Table t = read_table(text, {"tau_us", "population"}, {"sigma"});
      require_increasing(t, 0, "tau_us");
      std::vector<double> tau, p, s;
      for (const auto& r : t.rows) {
        tau.push_back(r.values[0]);
        p.push_back(r.values[1]);
        if (r.values.size() > 2) {
          require_positive(r, 2, "sigma");
          s.push_back(r.values[2]);
        }
      }
      std::optional<std::vector<double>> sig;
      if (t.columns.size() == 3) sig = std::move(s);
      return make(kind, DecayCurve(std::move(tau), std::move(p), std::move(sig)), t);
    }
    case DatasetKind::Histogram:
      return parse_histogram(text);
    case DatasetKind::SidebandSeries: {
      Table t = read_table(text, {"power_uw", "linewidth_khz"}, {"sigma_khz"});
      const auto it = t.metadata.find("sideband");
      if (it == t.metadata.end()) throw DataError("missing '# sideband: red|blue' header comment");
      optomech::SidebandSeries s;
      try {
        s.sideband = optomech::parse_sideband(it->second);
      } catch (const InvalidInputError& e) {
        throw DataError(e.what());
      }
      for (const auto& r : t.rows) {
        if (r.values[0] < 0.0) throw DataError("power_uw must be non-negative", r.line);
        optomech::SidebandPoint p{r.values[0], r.values[1], std::nullopt};
        if (r.values.size() > 2) {
          require_positive(r, 2, "sigma_khz");
          p.sigma_khz = r.values[2];
        }
        s.points.push_back(p);
      }
      return make(kind, std::move(s), t);
    }
    case DatasetKind::FourLine: {
      Table t = read_table(text, {"field_kg", "f_uu_ghz", "f_dd_ghz", "f_du_ghz", "f_ud_ghz"});
      std::vector<FourLineRecord> rows;
      for (const auto& r : t.rows) {
        if (r.values[0] < 0.0) throw DataError("field_kg must be non-negative", r.line);
        FourLineRecord rec;
        rec.field_kg = r.values[0];
        rec.lines.f_uu = r.values[1];
        rec.lines.f_dd = r.values[2];
        rec.lines.f_du = r.values[3];
        rec.lines.f_ud = r.values[4];
        rows.push_back(rec);
      }
      return make(kind, std::move(rows), t);
    }
    case DatasetKind::AnglePoints: {
      Table t = read_table(text, {"theta_deg", "gamma_khz"}, {"sigma_khz"});
      std::vector<AnglePoint> pts;
      for (const auto& r : t.rows) {
        AnglePoint p{r.values[0], r.values[1], std::nullopt};
        if (r.values.size() > 2) {
          require_positive(r, 2, "sigma_khz");
          p.sigma = r.values[2];
        }
        pts.push_back(p);
      }
      return make(kind, std::move(pts), t);
    }
  }
  throw InvalidInputError("unknown dataset kind");
}

Dataset load_dataset(const std::filesystem::path& path, DatasetKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset(buf.str(), kind);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const InvalidInputError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Writers

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string write_mode_table(const phonon::ModeTable& table) {
  const bool om = std::any_of(table.modes().begin(), table.modes().end(), [](const auto& m) { return m.g_om.has_value(); });
  std::string out = om ? "freq_ghz,q_factor,g_mhz,g_om_mhz\n" : "freq_ghz,q_factor,g_mhz\n";
  for (const auto& m : table.modes()) {
    out += format_number(m.omega_q) + "," + format_number(m.q_factor) + "," + format_number(m.g_q);
    if (om) out += "," + format_number(m.g_om.value_or(0.0));
    out += "\n";
  }
  return out;
}

std::string write_spectrum(const Spectrum& spectrum, const std::string& x_column, const std::string& y_column,
                           const std::string& sigma_column) {
  std::string out = x_column + "," + y_column;
  if (spectrum.sigmas()) out += "," + sigma_column;
  out += "\n";
  const auto x = spectrum.abscissa();
  const auto y = spectrum.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    out += format_number(x[i]) + "," + format_number(y[i]);
    if (spectrum.sigmas()) out += "," + format_number((*spectrum.sigmas())[i]);
    out += "\n";
  }
  return out;
}

std::string write_decay_curve(const DecayCurve& curve) {
  std::string out = curve.sigma() ? "tau_us,population,sigma\n" : "tau_us,population\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += format_number(curve.tau_us()[i]) + "," + format_number(curve.population()[i]);
    if (curve.sigma()) out += "," + format_number((*curve.sigma())[i]);
    out += "\n";
  }
  return out;
}

std::string write_histogram(const sim::Histogram& hist) {
  std::string out = "# kind: histogram\n";
  out += "# bin_width_ns: " + format_number(hist.bin_width_ns) + "\n";
  if (hist.sequence) {
    const auto& s = *hist.sequence;
    out += "# repump_us: " + format_number(s.repump_us) + "\n";
    out += "# pump_us: " + format_number(s.pump_us) + "\n";
    out += "# wait_tau_us: " + format_number(s.wait_tau_us) + "\n";
    out += "# probe_us: " + format_number(s.probe_us) + "\n";
    out += "# repetitions: " + std::to_string(s.repetitions) + "\n";
  }
  out += std::string("# analytic: ") + (hist.analytic ? "true" : "false") + "\n";
  for (const auto& seg : hist.segments) {
    out += "# segment: " + seg.name + " " + std::to_string(seg.first_bin) + " " + std::to_string(seg.bins) + "\n";
  }
  for (const auto& w : hist.warnings) out += "# warning: " + w + "\n";
  out += "bin_start_ns,counts\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out += format_number(static_cast<double>(i) * hist.bin_width_ns) + "," + format_number(hist.counts[i]) + "\n";
  }
  return out;
}

std::string write_sideband_series(const optomech::SidebandSeries& series) {
  const bool sig = !series.points.empty() &&
                   std::all_of(series.points.begin(), series.points.end(), [](const auto& p) { return p.sigma_khz.has_value(); });
  std::string out = std::string("# sideband: ") + optomech::to_string(series.sideband) + "\n";
  out += sig ? "power_uw,linewidth_khz,sigma_khz\n" : "power_uw,linewidth_khz\n";
  for (const auto& p : series.points) {
    out += format_number(p.power_uw) + "," + format_number(p.linewidth_khz);
    if (sig) out += "," + format_number(*p.sigma_khz);
    out += "\n";
  }
  return out;
}

std::string write_four_lines(const std::vector<FourLineRecord>& rows) {
  std::string out = "field_kg,f_uu_ghz,f_dd_ghz,f_du_ghz,f_ud_ghz\n";
  for (const auto& r : rows) {
    out += format_number(r.field_kg) + "," + format_number(r.lines.f_uu) + "," + format_number(r.lines.f_dd) + "," +
           format_number(r.lines.f_du) + "," + format_number(r.lines.f_ud) + "\n";
  }
  return out;
}

std::string write_angle_points(const std::vector<AnglePoint>& points) {
  const bool sig = !points.empty() &&
                   std::all_of(points.begin(), points.end(), [](const auto& p) { return p.sigma.has_value(); });
  std::string out = sig ? "theta_deg,gamma_khz,sigma_khz\n" : "theta_deg,gamma_khz\n";
  for (const auto& p : points) {
    out += format_number(p.theta_deg) + "," + format_number(p.gamma);
    if (sig) out += "," + format_number(*p.sigma);
    out += "\n";
  }
  return out;
}

PlotFormat parse_plot_format(const std::string& text) {
  if (text == "csv") return PlotFormat::Csv;
  if (text == "json") return PlotFormat::Json;
  throw InvalidInputError("format must be 'csv' or 'json', got '" + text + "'");
}

std::string render_plot_data(const std::vector<PlotSeries>& series, PlotFormat format) {
  if (series.empty()) throw InvalidInputError("no series to emit");
  if (format == PlotFormat::Json) {
    Json j = Json::object();
    for (const auto& s : series) {
      auto arr = Json::array();
      for (double v : s.values) arr.push_back(json_number(v));
      j[s.name] = std::move(arr);
    }
    return j.dump(2) + "\n";
  }
  const std::size_t n = series.front().values.size();
  for (const auto& s : series) {
    if (s.values.size() != n) throw DataError("CSV columns must have equal length ('" + s.name + "' differs)");
  }
  std::string out;
  for (std::size_t k = 0; k < series.size(); ++k) out += (k ? "," : "") + series[k].name;
  out += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < series.size(); ++k) out += (k ? "," : "") + format_number(series[k].values[i]);
    out += "\n";
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void emit_plot_data(const std::vector<PlotSeries>& series, const std::filesystem::path& path, PlotFormat format) {
  write_text_file(path, render_plot_data(series, format));
}

Json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json to_json(const FitReport& report) {
  Json params = Json::object();
  Json sigmas = Json::object();
  for (std::size_t i = 0; i < report.names.size(); ++i) {
    params[report.names[i]] = json_number(report.values[i]);
    sigmas[report.names[i]] = json_number(report.sigmas[i]);
  }
  Json j;
  j["params"] = params;
  j["sigmas"] = sigmas;
  j["residual_norm"] = json_number(report.residual_norm);
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  if (report.degenerate) j["degenerate"] = true;
  return j;
}

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  if (!(constants.planck > 0.0) || !(constants.boltzmann > 0.0)) throw InvalidInputError("physical constants must be positive");
  siv.validate();
}

RunConfig parse_run_config(const Json& j) {
  RunConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("constants")) {
      const auto& k = j.at("constants");
      c.constants.planck = k.value("planck", c.constants.planck);
      c.constants.boltzmann = k.value("boltzmann", c.constants.boltzmann);
    }
    if (j.contains("siv")) {
      const auto& s = j.at("siv");
      c.siv.lambda_so_gs = s.value("lambda_so_gs", c.siv.lambda_so_gs);
      c.siv.lambda_so_es = s.value("lambda_so_es", c.siv.lambda_so_es);
      c.siv.d = s.value("d", c.siv.d);
      c.siv.f = s.value("f", c.siv.f);
      c.siv.gyro = s.value("gyro", c.siv.gyro);
    }
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      c.tolerances.max_iterations = t.value("max_iterations", c.tolerances.max_iterations);
      c.tolerances.step_tolerance = t.value("step_tolerance", c.tolerances.step_tolerance);
      c.tolerances.gradient_tolerance = t.value("gradient_tolerance", c.tolerances.gradient_tolerance);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const InvalidInputError& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config '" + path.string() + "': " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace omcspin::io
