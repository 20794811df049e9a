#include "rssl/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rssl {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Removes a '#' comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void fail(const std::string& origin, int lineno, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(origin, lineno, "empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, lineno, "empty key");
    if (value.empty()) fail(origin, lineno, "empty value for key '" + key + "'");
    if (section.empty()) fail(origin, lineno, "key '" + key + "' outside any section");
    const std::string full = section + "." + key;
    if (cfg.values_.count(full)) fail(origin, lineno, "duplicate key '" + full + "'");
    cfg.values_[full] = value;
  }
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return values_.count(section + "." + key) > 0;
}

bool ConfigFile::has_section(const std::string& section) const {
  const std::string prefix = section + ".";
  auto it = values_.lower_bound(prefix);
  return it != values_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

const std::string& ConfigFile::raw(const std::string& section, const std::string& key) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) {
    throw ConfigError(origin_ + ": missing required key '" + section + "." + key + "'");
  }
  return it->second;
}

double ConfigFile::number(const std::string& section, const std::string& key) const {
  const std::string& v = raw(section, key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError(origin_ + ": key '" + section + "." + key + "' is not a number: " + v);
  }
  return x;
}

double ConfigFile::number_or(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

long long ConfigFile::integer(const std::string& section, const std::string& key) const {
  const std::string& v = raw(section, key);
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError(origin_ + ": key '" + section + "." + key + "' is not an integer: " + v);
  }
  return x;
}

long long ConfigFile::integer_or(const std::string& section, const std::string& key,
                                 long long fallback) const {
  return has(section, key) ? integer(section, key) : fallback;
}

std::string ConfigFile::str(const std::string& section, const std::string& key) const {
  std::string v = raw(section, key);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::string ConfigFile::str_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? str(section, key) : fallback;
}

bool ConfigFile::boolean(const std::string& section, const std::string& key) const {
  const std::string& v = raw(section, key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(origin_ + ": key '" + section + "." + key + "' is not a boolean: " + v);
}

bool ConfigFile::boolean_or(const std::string& section, const std::string& key,
                            bool fallback) const {
  return has(section, key) ? boolean(section, key) : fallback;
}

std::vector<double> ConfigFile::numbers(const std::string& section, const std::string& key) const {
  const std::string& v = raw(section, key);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    throw ConfigError(origin_ + ": key '" + section + "." + key + "' is not an array: " + v);
  }
  std::vector<double> out;
  std::string inner = v.substr(1, v.size() - 2);
  std::istringstream in(inner);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') {
      throw ConfigError(origin_ + ": array element of '" + section + "." + key +
                        "' is not a number: " + item);
    }
    out.push_back(x);
  }
  return out;
}

std::vector<double> ConfigFile::numbers_or(const std::string& section, const std::string& key,
                                           std::vector<double> fallback) const {
  return has(section, key) ? numbers(section, key) : fallback;
}

std::vector<std::string> ConfigFile::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& kv : values_) out.push_back(kv.first);
  return out;
}

}  // namespace rssl
