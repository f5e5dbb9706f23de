// Copyright 2026  The Voxlect Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "voxlect/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "voxlect/common.hpp"

namespace voxlect {

void write_fingerprint(const std::filesystem::path& dir,
                       const std::string& command,
                       const nlohmann::json& resolved_config,
                       std::uint64_t seed, const std::string& taxonomy_version) {
  nlohmann::json j = {{"command", command},
                      {"config", resolved_config},
                      {"seed", seed},
                      {"taxonomy_version", taxonomy_version},
                      {"code_version", code_version()}};
  Fnv1a h;
  h.update(j.dump());
  j["hash"] = h.hex();
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "fingerprint.json", j.dump(2) + "\n");
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string fmt(double v, int precision = 1) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace

std::string bar_chart_svg(const std::string& title,
                          std::span<const std::string> labels,
                          std::span<const double> values) {
  if (labels.size() != values.size()) {
    throw Error("bar chart: label and value counts differ");
  }
  const double label_w = 220, bar_w = 420, row_h = 22, top = 40;
  const double width = label_w + bar_w + 80;
  const double height = top + row_h * static_cast<double>(labels.size()) + 20;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"10\" y=\"22\" font-size=\"15\">" << escape(title) << "</text>\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = top + row_h * static_cast<double>(i);
    const double w = vmax > 0.0 ? bar_w * values[i] / vmax : 0.0;
    os << "<text x=\"" << label_w - 6 << "\" y=\"" << y + 15
       << "\" text-anchor=\"end\">" << escape(labels[i]) << "</text>\n"
       << "<rect x=\"" << label_w << "\" y=\"" << y + 3 << "\" width=\"" << fmt(w)
       << "\" height=\"" << row_h - 6 << "\" fill=\"#4a7ab5\"/>\n"
       << "<text x=\"" << fmt(label_w + w + 4) << "\" y=\"" << y + 15 << "\">"
       << fmt(values[i], values[i] == std::floor(values[i]) ? 0 : 3) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string confusion_heatmap_svg(const std::string& title,
                                  const ConfusionMatrix& cm,
                                  std::span<const std::string> class_names) {
  const int k = cm.num_classes;
  if (static_cast<int>(class_names.size()) != k) {
    throw Error("heatmap: class name count does not match the matrix");
  }
  const double cell = 46, left = 200, top = 60, bottom = 160;
  const double width = left + cell * k + 20;
  const double height = top + cell * k + bottom;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"10\" y=\"22\" font-size=\"15\">" << escape(title) << "</text>\n"
     << "<text x=\"10\" y=\"42\">rows: true class, columns: predicted class</text>\n";
  for (int i = 0; i < k; ++i) {
    const auto row = cm.row_total(i);
    const double y = top + cell * i;
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + cell / 2 + 4
       << "\" text-anchor=\"end\">" << escape(class_names[i]) << "</text>\n";
    for (int j = 0; j < k; ++j) {
      const double rate =
          row > 0 ? static_cast<double>(cm.at(i, j)) / static_cast<double>(row) : 0.0;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - rate)));
      const double x = left + cell * j;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << "," << shade
         << ",255)\" stroke=\"#ccc\"/>\n"
         << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
         << "\" text-anchor=\"middle\" fill=\"" << (rate > 0.5 ? "white" : "black")
         << "\">" << fmt(100.0 * rate) << "%</text>\n";
    }
  }
  const double base = top + cell * k + 8;
  for (int j = 0; j < k; ++j) {
    const double x = left + cell * j + cell / 2;
    os << "<text transform=\"translate(" << x << "," << base
       << ") rotate(60)\">" << escape(class_names[j]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace voxlect
