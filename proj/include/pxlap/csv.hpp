#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "pxlap/linalg.hpp"

namespace pxlap {

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_quote(const std::string& field) {
  bool needs = false;
  for (char c : field)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') needs = true;
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Accumulates RFC-4180-style rows; written atomically (temp + rename).
class Csv {
 public:
  explicit Csv(std::initializer_list<std::string> header) { row_strings(header); }

  void row_strings(std::initializer_list<std::string> fields) {
    std::string line;
    bool first = true;
    for (const auto& f : fields) {
      if (!first) line += ',';
      line += csv_quote(f);
      first = false;
    }
    line += '\n';
    body_ += line;
  }

  void row(const std::vector<std::string>& fields) {
    std::string line;
    bool first = true;
    for (const auto& f : fields) {
      if (!first) line += ',';
      line += csv_quote(f);
      first = false;
    }
    line += '\n';
    body_ += line;
  }

  const std::string& str() const { return body_; }

 private:
  std::string body_;
};

inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << content;
    if (!out) throw Error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("rename " + tmp + " -> " + path + " failed: " + ec.message());
}

}  // namespace pxlap
