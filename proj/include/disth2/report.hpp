#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "disth2/matkernel.hpp"

namespace disth2::report {

/// Formats a double with 17 significant digits (locale-independent);
/// non-finite values render as JSON null.
std::string num(double v);

std::string quote(std::string_view s);
std::string array_json(const std::vector<double>& values);
std::string array_json(const std::vector<bool>& values);
std::string matrix_json(const Matrix& m);

/// Insertion-ordered JSON object writer. Key order and number formatting are
/// fixed so identical inputs produce identical report bytes.
class Object {
 public:
  Object& put(std::string_view key, double v);
  Object& put(std::string_view key, int v);
  Object& put(std::string_view key, bool v);
  Object& put(std::string_view key, const char* v);
  Object& put(std::string_view key, const std::string& v);
  Object& put_null(std::string_view key);
  Object& put_raw(std::string_view key, std::string json);

  /// Multiline rendering with two-space indentation and a trailing newline.
  std::string str() const;
  /// Single-line rendering for nesting via put_raw.
  std::string inline_str() const;

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

}  // namespace disth2::report
