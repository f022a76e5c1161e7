/*
 * Copyright 2026 The CLTR Robustness Toolkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "cltr/error.hpp"
#include "cltr/experiment.hpp"
#include "cltr/text.hpp"

namespace cltr {
namespace {

constexpr double kClampBelow = -0.2;
constexpr int kLabelWidth = 130;
constexpr int kPlotWidth = 440;
constexpr int kRowHeight = 22;
constexpr int kTop = 40;

std::string escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double value, int digits = 1) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

}  // namespace

std::string render_ninc_chart(const std::string& title,
                              const std::vector<std::pair<std::string, double>>& models) {
  const int width = kLabelWidth + kPlotWidth + 60;
  std::ostringstream svg;
  if (models.empty()) {
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"80\">\n"
        << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
        << escape(title) << "</text>\n"
        << "<text x=\"10\" y=\"50\" font-family=\"sans-serif\" font-size=\"12\">no data</text>\n"
        << "</svg>\n";
    return svg.str();
  }

  double hi = 1.2;
  for (const auto& [name, value] : models) hi = std::max(hi, value);
  const auto x = [&](double v) {
    return kLabelWidth + (v - kClampBelow) / (hi - kClampBelow) * kPlotWidth;
  };
  const int height = kTop + static_cast<int>(models.size()) * kRowHeight + 30;
  const int bottom = height - 30;

  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\">\n";
  svg << "<text x=\"10\" y=\"20\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (const double ref : {0.0, 1.0}) {
    svg << "<line x1=\"" << fixed(x(ref)) << "\" y1=\"" << kTop - 6 << "\" x2=\""
        << fixed(x(ref)) << "\" y2=\"" << bottom << "\" stroke=\"#555\" stroke-dasharray=\"4 3\"/>\n";
    svg << "<text x=\"" << fixed(x(ref)) << "\" y=\"" << bottom + 16
        << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(ref) << "</text>\n";
  }
  int row = 0;
  for (const auto& [name, value] : models) {
    const double y = kTop + row * kRowHeight;
    const bool clamped = value < kClampBelow;
    const double shown = clamped ? kClampBelow : value;
    const double x0 = std::min(x(0.0), x(shown));
    const double x1 = std::max(x(0.0), x(shown));
    svg << "<text x=\"" << kLabelWidth - 6 << "\" y=\"" << fixed(y + 14)
        << "\" font-size=\"11\" text-anchor=\"end\">" << escape(name) << "</text>\n";
    svg << "<rect x=\"" << fixed(x0) << "\" y=\"" << fixed(y + 3) << "\" width=\""
        << fixed(std::max(x1 - x0, 0.5)) << "\" height=\"" << kRowHeight - 6 << "\" fill=\""
        << (value < 0 ? "#c0504d" : "#4f81bd") << "\"/>\n";
    if (clamped) {
      svg << "<text x=\"" << fixed(x(kClampBelow) + 2) << "\" y=\"" << fixed(y + 14)
          << "\" font-size=\"10\" fill=\"#fff\">" << fixed(value, 2) << "</text>\n";
    } else {
      svg << "<text x=\"" << fixed(x1 + 3) << "\" y=\"" << fixed(y + 14)
          << "\" font-size=\"10\">" << fixed(value, 3) << "</text>\n";
    }
    ++row;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::string> emit_plots(const std::string& report_csv, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::istringstream in(report_csv);
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw ParseError("report header mismatch", 1);
  }

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<std::string, double>>> cells;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 12) throw ParseError("report row needs 12 fields", line_number);
    const std::string key = std::string(fields[4]) + "_pr" + std::string(fields[1]) + "_" +
                            std::string(fields[2]) + "_n" + std::string(fields[3]);
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) order.push_back(key);
    if (trim(fields[11]).empty()) continue;  // undefined for this cell
    const auto ninc = parse_double(fields[11]);
    if (!ninc) throw ParseError("bad ninc value", line_number);
    it->second.emplace_back(std::string(fields[0]), *ninc);
  }

  fs::create_directories(out_dir);
  std::vector<std::string> written;
  if (order.empty()) {
    const std::string path = (fs::path(out_dir) / "no_data.svg").string();
    write_file_if_changed(path, render_ninc_chart("empty report", {}));
    written.push_back(path);
    return written;
  }
  for (const std::string& key : order) {
    const std::string path = (fs::path(out_dir) / (key + ".svg")).string();
    write_file_if_changed(path, render_ninc_chart("nInc " + key, cells[key]));
    written.push_back(path);
  }
  return written;
}

}  // namespace cltr
