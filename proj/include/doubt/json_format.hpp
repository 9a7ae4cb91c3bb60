#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

#include "doubt/extended_real.hpp"

namespace doubt {

/// Shortest round-trip decimal form of a double: fixed notation when the
/// decimal exponent is in [-4, 16), scientific otherwise, always with a
/// fractional part or an exponent. Matches Python's float repr, so files
/// written here compare byte-for-byte against reference tooling.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  if (v == 0.0) return std::signbit(v) ? "-0.0" : "0.0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  const std::string sci(buf, res.ptr);
  std::size_t pos = 0;
  const bool negative = sci[0] == '-';
  if (negative) pos = 1;
  const std::size_t epos = sci.find('e');
  std::string digits = sci.substr(pos, epos - pos);
  const std::size_t dot = digits.find('.');
  if (dot != std::string::npos) digits.erase(dot, 1);
  const int exp10 = std::atoi(sci.c_str() + epos + 1);

  std::string out;
  if (negative) out += '-';
  if (exp10 >= -4 && exp10 < 16) {
    if (exp10 >= static_cast<int>(digits.size()) - 1) {
      out += digits;
      out.append(static_cast<std::size_t>(exp10) - (digits.size() - 1), '0');
      out += ".0";
    } else if (exp10 >= 0) {
      out += digits.substr(0, exp10 + 1);
      out += '.';
      out += digits.substr(exp10 + 1);
    } else {
      out += "0.";
      out.append(static_cast<std::size_t>(-exp10) - 1, '0');
      out += digits;
    }
  } else {
    out += digits[0];
    if (digits.size() > 1) {
      out += '.';
      out += digits.substr(1);
    }
    char exp_buf[16];
    std::snprintf(exp_buf, sizeof exp_buf, "e%+03d", exp10);
    out += exp_buf;
  }
  return out;
}

inline void append_json_string(std::string& out, std::string_view s) {
  out += '"';
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char esc[8];
          std::snprintf(esc, sizeof esc, "\\u%04x", c);
          out += esc;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

/// JSON has no infinity literal; infinite values are written as the quoted
/// tokens "inf" / "-inf", finite values as plain numbers.
inline void append_number_token(std::string& out, double v) {
  if (std::isinf(v)) {
    out += v > 0.0 ? "\"inf\"" : "\"-inf\"";
  } else {
    out += format_double(v);
  }
}

inline void append_number_token(std::string& out, const ExtendedReal& e) {
  append_number_token(out, e.value());
}

}  // namespace doubt
