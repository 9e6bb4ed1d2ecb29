#pragma once

#include <map>
#include <string>
#include <vector>

namespace kst::config {

/// Minimal flat TOML reader covering what the geometry/demo configs need:
/// `[table]` headers, `key = value` lines with number, string, boolean, or
/// `[n1, n2, ...]` numeric-array values, and `#` comments. Keys are stored
/// as "table.key". Anything fancier is rejected.
class TomlLite {
 public:
  static TomlLite parse_file(const std::string& path);
  static TomlLite parse_string(const std::string& text);

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  const std::string& str(const std::string& key) const;
  const std::vector<double>& array(const std::string& key) const;
  std::vector<double> array_or(const std::string& key, std::vector<double> fallback) const;

 private:
  std::map<std::string, double> numbers_;
  std::map<std::string, std::string> strings_;
  std::map<std::string, std::vector<double>> arrays_;
};

}  // namespace kst::config
