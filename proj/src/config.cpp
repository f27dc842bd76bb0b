#include "hosm/config.hpp"

#include <fstream>
#include <sstream>

namespace hosm {

namespace {
std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t cpos = line.find_first_of("#;");
    if (cpos != std::string::npos) line = line.substr(0, cpos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.sections_[section][key] = val;
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) != 0;
}

std::string Config::get_str(const std::string& section, const std::string& key, const std::string& def) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return def;
  auto k = s->second.find(key);
  return k == s->second.end() ? def : k->second;
}

std::string Config::require_str(const std::string& section, const std::string& key) const {
  if (!has(section, key)) throw ConfigError(origin_ + ": missing required key [" + section + "] " + key);
  return get_str(section, key, "");
}

double Config::get_f64(const std::string& section, const std::string& key, double def) const {
  if (!has(section, key)) return def;
  return require_f64(section, key);
}

double Config::require_f64(const std::string& section, const std::string& key) const {
  const std::string v = require_str(section, key);
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": [" + section + "] " + key + " is not a number: '" + v + "'");
  }
}

long Config::get_i64(const std::string& section, const std::string& key, long def) const {
  if (!has(section, key)) return def;
  const std::string v = require_str(section, key);
  try {
    return std::stol(v);
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": [" + section + "] " + key + " is not an integer: '" + v + "'");
  }
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key, std::uint64_t def) const {
  if (!has(section, key)) return def;
  return require_u64(section, key);
}

std::uint64_t Config::require_u64(const std::string& section, const std::string& key) const {
  const std::string v = require_str(section, key);
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": [" + section + "] " + key + " is not an unsigned integer: '" + v + "'");
  }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool def) const {
  if (!has(section, key)) return def;
  const std::string v = get_str(section, key, "");
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(origin_ + ": [" + section + "] " + key + " is not a boolean: '" + v + "'");
}

std::vector<double> Config::get_f64_list(const std::string& section, const std::string& key,
                                         const std::vector<double>& def) const {
  if (!has(section, key)) return def;
  std::vector<double> out;
  for (const std::string& tok : get_str_list(section, key)) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": [" + section + "] " + key + " has a non-numeric entry: '" + tok + "'");
    }
  }
  return out;
}

std::vector<std::string> Config::get_str_list(const std::string& section, const std::string& key) const {
  std::vector<std::string> out;
  if (!has(section, key)) return out;
  const std::string v = get_str(section, key, "");
  std::size_t start = 0;
  while (start <= v.size()) {
    std::size_t comma = v.find(',', start);
    if (comma == std::string::npos) comma = v.size();
    const std::string tok = trim(v.substr(start, comma - start));
    if (!tok.empty()) out.push_back(tok);
    start = comma + 1;
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

}  // namespace hosm
