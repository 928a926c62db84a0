#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chenfliess/errors.hpp"

namespace chenfliess {

/// Sectioned key = value text. '#' starts a comment; every entry remembers
/// its line so errors can point back into the file.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };
  using Section = std::map<std::string, Entry>;

  static Config parse(std::istream& in) {
    Config cfg;
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      const std::string text = trim(raw);
      if (text.empty()) continue;
      if (text.front() == '[') {
        if (text.back() != ']') throw ConfigError("unterminated section header", line);
        section = trim(text.substr(1, text.size() - 2));
        if (section.empty()) throw ConfigError("empty section name", line);
        if (cfg.sections_.count(section)) throw ConfigError("duplicate section [" + section + "]", line);
        cfg.sections_[section];
        cfg.section_lines_[section] = line;
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value", line);
      if (section.empty()) throw ConfigError("key outside of any section", line);
      const std::string key = trim(text.substr(0, eq));
      if (key.empty()) throw ConfigError("empty key", line);
      auto& sec = cfg.sections_[section];
      if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
      sec[key] = {trim(text.substr(eq + 1)), line};
    }
    return cfg;
  }

  static Config parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in);
  }

  bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
  bool has(const std::string& s, const std::string& k) const {
    const auto it = sections_.find(s);
    return it != sections_.end() && it->second.count(k) != 0;
  }

  const Section& section(const std::string& s) const {
    const auto it = sections_.find(s);
    if (it == sections_.end()) throw ConfigError("missing section [" + s + "]");
    return it->second;
  }

  int line_of(const std::string& s, const std::string& k) const {
    if (has(s, k)) return sections_.at(s).at(k).line;
    const auto it = section_lines_.find(s);
    return it == section_lines_.end() ? 0 : it->second;
  }

  std::string get(const std::string& s, const std::string& k) const {
    if (!has(s, k))
      throw ConfigError("missing key '" + k + "' in [" + s + "]", line_of(s, k));
    return sections_.at(s).at(k).value;
  }

  std::string get_or(const std::string& s, const std::string& k, const std::string& fallback) const {
    return has(s, k) ? get(s, k) : fallback;
  }

  double get_double(const std::string& s, const std::string& k) const {
    return to_double(get(s, k), line_of(s, k), k);
  }
  double get_double(const std::string& s, const std::string& k, double fallback) const {
    return has(s, k) ? get_double(s, k) : fallback;
  }

  long long get_int(const std::string& s, const std::string& k) const {
    const std::string v = get(s, k);
    std::size_t pos = 0;
    long long out = 0;
    try {
      out = std::stoll(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v.size())
      throw ConfigError("key '" + k + "' expects an integer, got '" + v + "'", line_of(s, k));
    return out;
  }
  long long get_int(const std::string& s, const std::string& k, long long fallback) const {
    return has(s, k) ? get_int(s, k) : fallback;
  }

  std::size_t get_count(const std::string& s, const std::string& k, std::size_t fallback) const {
    if (!has(s, k)) return fallback;
    const long long v = get_int(s, k);
    if (v < 1) throw ConfigError("key '" + k + "' must be positive", line_of(s, k));
    return static_cast<std::size_t>(v);
  }

  bool get_bool(const std::string& s, const std::string& k, bool fallback) const {
    if (!has(s, k)) return fallback;
    const std::string v = get(s, k);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("key '" + k + "' expects true or false", line_of(s, k));
  }

  std::vector<double> get_doubles(const std::string& s, const std::string& k) const {
    std::vector<double> out;
    const std::string v = get(s, k);
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), line_of(s, k), k));
    if (out.empty()) throw ConfigError("key '" + k + "' expects a list of numbers", line_of(s, k));
    return out;
  }

  /// Sets or replaces a value; overrides carry no line.
  void set(const std::string& s, const std::string& k, const std::string& v) {
    sections_[s][k] = {v, 0};
  }

  /// Rejects keys outside `allowed` so typos do not pass silently.
  void require_keys(const std::string& s, const std::set<std::string>& allowed) const {
    if (!has_section(s)) return;
    for (const auto& [k, e] : sections_.at(s))
      if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in [" + s + "]", e.line);
  }

  std::vector<std::string> section_names() const {
    std::vector<std::string> out;
    for (const auto& [name, sec] : sections_) out.push_back(name);
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, sec] : sections_) {
      auto& js = j[name];
      js = nlohmann::ordered_json::object();
      for (const auto& [k, e] : sec) js[k] = e.value;
    }
    return j;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

 private:
  static double to_double(const std::string& v, int line, const std::string& k) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v.size())
      throw ConfigError("key '" + k + "' expects a number, got '" + v + "'", line);
    return out;
  }

  std::map<std::string, Section> sections_;
  std::map<std::string, int> section_lines_;
};

}  // namespace chenfliess
