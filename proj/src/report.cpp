#include "disth2/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace disth2::report {

std::string num(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
  return out;
}

std::string array_json(const std::vector<double>& values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += num(values[i]);
  }
  out += ']';
  return out;
}

std::string array_json(const std::vector<bool>& values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += values[i] ? "true" : "false";
  }
  out += ']';
  return out;
}

std::string matrix_json(const Matrix& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += ", ";
    out += '[';
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ", ";
      out += num(m(r, c));
    }
    out += ']';
  }
  out += ']';
  return out;
}

Object& Object::put(std::string_view key, double v) {
  fields_.emplace_back(std::string(key), num(v));
  return *this;
}

Object& Object::put(std::string_view key, int v) {
  fields_.emplace_back(std::string(key), std::to_string(v));
  return *this;
}

Object& Object::put(std::string_view key, bool v) {
  fields_.emplace_back(std::string(key), v ? "true" : "false");
  return *this;
}

Object& Object::put(std::string_view key, const char* v) {
  fields_.emplace_back(std::string(key), quote(v));
  return *this;
}

Object& Object::put(std::string_view key, const std::string& v) {
  fields_.emplace_back(std::string(key), quote(v));
  return *this;
}

Object& Object::put_null(std::string_view key) {
  fields_.emplace_back(std::string(key), "null");
  return *this;
}

Object& Object::put_raw(std::string_view key, std::string json) {
  fields_.emplace_back(std::string(key), std::move(json));
  return *this;
}

std::string Object::str() const {
  std::string out = "{\n";
  for (size_t i = 0; i < fields_.size(); ++i) {
    out += "  " + quote(fields_[i].first) + ": " + fields_[i].second;
    if (i + 1 < fields_.size()) out += ',';
    out += '\n';
  }
  out += "}\n";
  return out;
}

std::string Object::inline_str() const {
  std::string out = "{";
  for (size_t i = 0; i < fields_.size(); ++i) {
    if (i) out += ", ";
    out += quote(fields_[i].first) + ": " + fields_[i].second;
  }
  out += '}';
  return out;
}

}  // namespace disth2::report
