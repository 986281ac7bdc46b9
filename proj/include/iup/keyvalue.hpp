#pragma once

// Line-oriented `key = value` documents: one pair per line, `#` starts a
// comment line, arrays are comma-separated. Used for configs, stack manifests,
// map sidecars and dispersion tables.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "iup/errors.hpp"

namespace iup {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidInput("'" + what + "' expects a number, got '" + text + "'");
}

inline std::int64_t parse_int(const std::string& text, const std::string& what) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw InvalidInput("'" + what + "' expects an integer, got '" + text + "'");
  return v;
}

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}

class KeyValueDoc {
 public:
  static KeyValueDoc parse(std::istream& in, const std::string& source = "<input>") {
    KeyValueDoc doc;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ValidationError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      doc.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    }
    return doc;
  }

  static KeyValueDoc parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static KeyValueDoc load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse(in, path);
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) throw ValidationError("empty key");
    if (values_.find(key) == values_.end()) order_.push_back(key);
    values_[key] = value;
  }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }

  void set_list(const std::string& key, const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + format_double(values[i]);
    set(key, s);
  }
  void set_list(const std::string& key, const std::vector<std::string>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + values[i];
    set(key, s);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("missing key '" + key + "'");
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
  }
  double get_double(const std::string& key) const { return parse_double(get(key), key); }
  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }
  std::int64_t get_int(const std::string& key) const { return parse_int(get(key), key); }
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
  }
  std::vector<std::string> get_list(const std::string& key) const { return split_list(get(key)); }
  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(key)) out.push_back(parse_double(item, key));
    return out;
  }

  const std::vector<std::string>& keys() const noexcept { return order_; }

  // Overlays every pair of `other` onto this document.
  void merge(const KeyValueDoc& other) {
    for (const auto& k : other.order_) set(k, other.get(k));
  }

  std::string serialize() const {
    std::string out;
    for (const auto& k : order_) out += k + " = " + values_.at(k) + "\n";
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace iup
