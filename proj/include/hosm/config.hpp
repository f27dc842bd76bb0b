#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hosm {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Plain-text key-value config with [section] headers. '#' and ';' start
// comments; keys are `name = value`; section names may be dotted.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get_str(const std::string& section, const std::string& key, const std::string& def) const;
  std::string require_str(const std::string& section, const std::string& key) const;
  double get_f64(const std::string& section, const std::string& key, double def) const;
  double require_f64(const std::string& section, const std::string& key) const;
  long get_i64(const std::string& section, const std::string& key, long def) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t def) const;
  std::uint64_t require_u64(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key, bool def) const;
  // comma-separated doubles
  std::vector<double> get_f64_list(const std::string& section, const std::string& key,
                                   const std::vector<double>& def) const;
  std::vector<std::string> get_str_list(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  const std::map<std::string, std::map<std::string, std::string>>& sections() const { return sections_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string origin_;
};

}  // namespace hosm
