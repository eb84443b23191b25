#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pxlap/linalg.hpp"

namespace pxlap {

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Sectioned key = value configuration. Values are scalars, names, or
// whitespace/comma separated lists; '#' and ';' start comments.
class Config {
 public:
  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  static Config parse(const std::string& text, const std::string& origin = "<string>") {
    Config cfg;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        cfg.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.sections_[section][key] = value;
    }
    return cfg;
  }

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  bool has(const std::string& s, const std::string& k) const {
    const auto it = sections_.find(s);
    return it != sections_.end() && it->second.count(k) > 0;
  }

  std::string get_string(const std::string& s, const std::string& k) const {
    const auto it = sections_.find(s);
    if (it == sections_.end()) throw ConfigError("missing config section [" + s + "]");
    const auto kt = it->second.find(k);
    if (kt == it->second.end())
      throw ConfigError("missing key '" + k + "' in section [" + s + "]");
    return kt->second;
  }

  std::string get_string(const std::string& s, const std::string& k,
                         const std::string& fallback) const {
    return has(s, k) ? get_string(s, k) : fallback;
  }

  double get_double(const std::string& s, const std::string& k) const {
    return to_double(get_string(s, k), s, k);
  }

  double get_double(const std::string& s, const std::string& k, double fallback) const {
    return has(s, k) ? get_double(s, k) : fallback;
  }

  long long get_int(const std::string& s, const std::string& k) const {
    const std::string v = get_string(s, k);
    try {
      std::size_t pos = 0;
      const long long r = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return r;
    } catch (const std::exception&) {
      throw ConfigError("key '" + k + "' in [" + s + "] is not an integer: '" + v + "'");
    }
  }

  long long get_int(const std::string& s, const std::string& k, long long fallback) const {
    return has(s, k) ? get_int(s, k) : fallback;
  }

  std::vector<double> get_list(const std::string& s, const std::string& k) const {
    const std::string v = get_string(s, k);
    std::vector<double> out;
    std::string token;
    for (char c : v) {
      if (c == ',' || c == ' ' || c == '\t') {
        if (!token.empty()) out.push_back(to_double(token, s, k));
        token.clear();
      } else {
        token += c;
      }
    }
    if (!token.empty()) out.push_back(to_double(token, s, k));
    if (out.empty()) throw ConfigError("key '" + k + "' in [" + s + "] is an empty list");
    return out;
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
  }

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static double to_double(const std::string& v, const std::string& s, const std::string& k) {
    try {
      std::size_t pos = 0;
      const double r = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return r;
    } catch (const std::exception&) {
      throw ConfigError("key '" + k + "' in [" + s + "] is not a number: '" + v + "'");
    }
  }

  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace pxlap
