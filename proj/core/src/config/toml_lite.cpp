#include "kst/config/toml_lite.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "kst/errors.hpp"

namespace kst::config {

namespace {

std::string strip(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& tok, int lineno) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw KstError(Errc::parse, "config line " + std::to_string(lineno) + ": bad number '" + tok + "'");
  return v;
}

}  // namespace

TomlLite TomlLite::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw KstError(Errc::io, "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

TomlLite TomlLite::parse_string(const std::string& text) {
  TomlLite out;
  std::istringstream in(text);
  std::string raw, table;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::size_t hash = raw.find('#');
    // keep '#' inside quoted strings
    std::size_t quote = raw.find('"');
    if (hash != std::string::npos && (quote == std::string::npos || hash < quote))
      raw.erase(hash);
    std::string line = strip(raw);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      table = strip(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw KstError(Errc::parse, "config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw KstError(Errc::parse, "config line " + std::to_string(lineno) + ": empty key or value");
    if (!table.empty()) key = table + "." + key;

    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        throw KstError(Errc::parse, "config line " + std::to_string(lineno) + ": unterminated string");
      out.strings_[key] = value.substr(1, value.size() - 2);
    } else if (value.front() == '[') {
      if (value.back() != ']')
        throw KstError(Errc::parse, "config line " + std::to_string(lineno) + ": unterminated array");
      std::vector<double> arr;
      std::string body = value.substr(1, value.size() - 2);
      std::size_t pos = 0;
      while (pos < body.size()) {
        std::size_t comma = body.find(',', pos);
        std::string tok = strip(body.substr(pos, comma == std::string::npos ? comma : comma - pos));
        if (!tok.empty()) arr.push_back(parse_number(tok, lineno));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      out.arrays_[key] = std::move(arr);
    } else if (value == "true" || value == "false") {
      out.numbers_[key] = value == "true" ? 1.0 : 0.0;
    } else {
      out.numbers_[key] = parse_number(value, lineno);
    }
  }
  return out;
}

bool TomlLite::has(const std::string& key) const {
  return numbers_.count(key) || strings_.count(key) || arrays_.count(key);
}

double TomlLite::number(const std::string& key) const {
  auto it = numbers_.find(key);
  if (it == numbers_.end()) throw KstError(Errc::bad_args, "config key missing: " + key);
  return it->second;
}

double TomlLite::number_or(const std::string& key, double fallback) const {
  auto it = numbers_.find(key);
  return it == numbers_.end() ? fallback : it->second;
}

const std::string& TomlLite::str(const std::string& key) const {
  auto it = strings_.find(key);
  if (it == strings_.end()) throw KstError(Errc::bad_args, "config key missing: " + key);
  return it->second;
}

const std::vector<double>& TomlLite::array(const std::string& key) const {
  auto it = arrays_.find(key);
  if (it == arrays_.end()) throw KstError(Errc::bad_args, "config key missing: " + key);
  return it->second;
}

std::vector<double> TomlLite::array_or(const std::string& key, std::vector<double> fallback) const {
  auto it = arrays_.find(key);
  return it == arrays_.end() ? std::move(fallback) : it->second;
}

}  // namespace kst::config
