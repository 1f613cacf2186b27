#pragma once
// Minimal CSV emission: '#'-prefixed comment lines, a header row, numeric
// rows at 12 significant digits.  NaN renders as an empty cell so sweeps can
// record per-row failures without breaking rectangularity.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace csma {

inline std::string csv_format(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  void header(const std::vector<std::string>& cols) {
    columns_ = cols.size();
    write_joined(cols);
  }

  void row(const std::vector<double>& vals) {
    if (columns_ != 0 && vals.size() != columns_)
      throw std::runtime_error("csv row width does not match header");
    std::vector<std::string> cells;
    cells.reserve(vals.size());
    for (double v : vals) cells.push_back(csv_format(v));
    write_joined(cells);
  }

 private:
  void write_joined(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      out_ << cells[i];
    }
    out_ << "\n";
  }

  std::ofstream out_;
  size_t columns_ = 0;
};

}  // namespace csma
