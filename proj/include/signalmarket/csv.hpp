#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "signalmarket/errors.hpp"

namespace signalmarket::csv {

// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Ten significant digits, printf %.10g.
inline std::string format_g10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// One RFC 4180 record. Quoted fields may span lines. Returns false at EOF.
inline bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (in_quotes) throw_input("unterminated quoted CSV field");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

inline double parse_double(std::string_view s, std::string_view column, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw_input("line ", line, ": column '", column, "' expects a number, got '", s, "'");
  }
  return v;
}

inline long long parse_int(std::string_view s, std::string_view column, std::size_t line) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw_input("line ", line, ": column '", column, "' expects an integer, got '", s, "'");
  }
  return v;
}

// Fails naming the first column that differs from the expected header.
inline void check_header(const std::vector<std::string>& got, const std::vector<std::string>& expected,
                         std::string_view file) {
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= got.size()) throw_input(file, ": missing column '", expected[i], "' (position ", i + 1, ")");
    if (got[i] != expected[i]) {
      throw_input(file, ": column ", i + 1, " is '", got[i], "', expected '", expected[i], "'");
    }
  }
  if (got.size() > expected.size()) {
    throw_input(file, ": unexpected column '", got[expected.size()], "'");
  }
}

}  // namespace signalmarket::csv
