#pragma once

#include <map>
#include <string>
#include <vector>

#include "rssl/errors.hpp"

// Flat TOML-style configuration: [section] headers, key = value lines with
// numbers, quoted strings, booleans, and flat numeric arrays; '#' comments.
namespace rssl {

class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  long long integer(const std::string& section, const std::string& key) const;
  long long integer_or(const std::string& section, const std::string& key,
                       long long fallback) const;
  std::string str(const std::string& section, const std::string& key) const;
  std::string str_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  bool boolean(const std::string& section, const std::string& key) const;
  bool boolean_or(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;
  std::vector<double> numbers_or(const std::string& section, const std::string& key,
                                 std::vector<double> fallback) const;

  // All "section.key" entries, for strict unknown-key validation.
  std::vector<std::string> keys() const;

 private:
  const std::string& raw(const std::string& section, const std::string& key) const;
  std::map<std::string, std::string> values_;
  std::string origin_;
};

}  // namespace rssl
