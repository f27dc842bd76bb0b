#include "hosm/csvio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hosm {

std::string format_f64(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header) : width_(header.size()) {
  auto* os = new std::ofstream(path, std::ios::trunc);
  if (!*os) {
    delete os;
    throw std::runtime_error("csv: cannot open for writing: " + path);
  }
  os_ = os;
  for (std::size_t i = 0; i < header.size(); ++i) (*os) << (i ? "," : "") << header[i];
  (*os) << "\n";
}

CsvWriter::~CsvWriter() { delete static_cast<std::ofstream*>(os_); }

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw std::invalid_argument("csv: row width mismatch");
  auto& os = *static_cast<std::ofstream*>(os_);
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << format_f64(values[i]);
  os << "\n";
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::invalid_argument("csv: row width mismatch");
  auto& os = *static_cast<std::ofstream*>(os_);
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << "\n";
}

void write_points_csv(const std::string& path, const std::vector<Vec>& points) {
  std::vector<std::string> header;
  const std::size_t d = points.empty() ? 0 : points.front().size();
  for (std::size_t i = 0; i < d; ++i) header.push_back("x" + std::to_string(i));
  if (header.empty()) header.push_back("x0");
  CsvWriter w(path, header);
  for (const Vec& p : points) w.row(p);
}

std::vector<Vec> read_points_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("csv: cannot open: " + path);
  std::vector<Vec> points;
  std::string line;
  int lineno = 0;
  std::size_t width = 0;
  bool saw_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (!saw_header) {  // header row
      saw_header = true;
      continue;
    }
    Vec row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      // strtod instead of stod: subnormal values parse instead of throwing
      const char* cs = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(cs, &end);
      if (end == cs || (end != nullptr && *end != '\0' && *end != '\r'))
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": cannot parse cell '" + cell + "'");
      row.push_back(v);
    }
    if (row.empty()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty row");
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": inconsistent column count");
    points.push_back(std::move(row));
  }
  return points;
}

}  // namespace hosm
