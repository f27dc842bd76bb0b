#pragma once

#include <string>
#include <vector>

#include "hosm/linalg.hpp"

namespace hosm {

// CSV with a header row; numeric cells are written with %.17g so files
// round-trip bit-exactly and reruns are byte-identical.
struct CsvWriter {
  explicit CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);

 private:
  void* os_;
  std::size_t width_;
};

std::string format_f64(double v);

// One sample per row; header x0,...,x{D-1}.
void write_points_csv(const std::string& path, const std::vector<Vec>& points);
// Parse failures report the 1-based line number. An empty file (or header
// only) yields an empty list.
std::vector<Vec> read_points_csv(const std::string& path);

}  // namespace hosm
