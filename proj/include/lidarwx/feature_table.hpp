#pragma once

// Feature table CSV: f1..f16, label, scenario, m1..m16 (mask bits 0/1).
// Values are printed with 17 significant digits and round-trip exactly.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lidarwx/classifier.hpp"
#include "lidarwx/error.hpp"

namespace lidarwx {

inline std::string feature_table_header() {
  std::string h;
  for (std::size_t i = 1; i <= kFeatureCount; ++i) h += "f" + std::to_string(i) + ",";
  h += "label,scenario";
  for (std::size_t i = 1; i <= kFeatureCount; ++i) h += ",m" + std::to_string(i);
  return h;
}

inline std::string format_feature_table(const std::vector<LabeledSample>& samples) {
  std::string out = feature_table_header() + "\n";
  char buf[32];
  for (const auto& s : samples) {
    if (s.scenario_id.find_first_of(",\n\r\"") != std::string::npos)
      throw InvalidArgument("scenario id '" + s.scenario_id + "' is not CSV-safe");
    for (double v : s.features.f) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      out += ',';
    }
    out += to_string(s.truth.label);
    out += ',';
    out += s.scenario_id;
    for (bool m : s.features.mask) out += m ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                       : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error("feature table line " + std::to_string(line_no) + ": bad number '" +
                std::string(s) + "'");
  return v;
}

}  // namespace detail

/// Parses a feature table. Label-only ground truth is restored (visibility
/// and rainfall rate are not part of the table).
inline std::vector<LabeledSample> parse_feature_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("feature table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != feature_table_header()) throw Error("feature table has an unexpected header");
  std::vector<LabeledSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 2 * kFeatureCount + 2)
      throw Error("feature table line " + std::to_string(line_no) + ": expected " +
                  std::to_string(2 * kFeatureCount + 2) + " columns, got " +
                  std::to_string(cells.size()));
    LabeledSample s;
    for (std::size_t i = 0; i < kFeatureCount; ++i) s.features.f[i] = detail::parse_double(cells[i], line_no);
    s.truth.label = parse_label(cells[kFeatureCount]);
    s.scenario_id = std::string(cells[kFeatureCount + 1]);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto c = cells[kFeatureCount + 2 + i];
      if (c != "0" && c != "1")
        throw Error("feature table line " + std::to_string(line_no) + ": mask must be 0 or 1");
      s.features.mask[i] = c == "1";
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw Error("write to '" + path + "' failed");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace lidarwx
