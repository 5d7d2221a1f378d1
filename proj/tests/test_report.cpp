#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "disth2/report.hpp"

using namespace disth2;

TEST_CASE("number formatting: 17 significant digits, null for non-finite") {
  CHECK(report::num(2.5) == "2.5");
  CHECK(report::num(1.0 / 3.0) == "0.33333333333333331");
  CHECK(report::num(std::numeric_limits<double>::quiet_NaN()) == "null");
  CHECK(report::num(std::numeric_limits<double>::infinity()) == "null");

  // formatted value round-trips to the same double
  const double v = -0.35355339059327373;
  CHECK(std::stod(report::num(v)) == v);
}

TEST_CASE("object writer emits parseable insertion-ordered JSON") {
  report::Object nested;
  nested.put("lower", 0.0).put("upper", 1.0 / 6.0).put("upper_inclusive", true);

  report::Object obj;
  obj.put("schema_version", "1");
  obj.put("command", "design");
  obj.put("gamma", 2.5);
  obj.put("nodes", 2);
  obj.put("certified", true);
  obj.put_null("missing");
  obj.put_raw("coupling_range", nested.inline_str());
  obj.put_raw("eigenvalues", report::array_json(std::vector<double>{0.0, 2.0}));

  const std::string text = obj.str();
  const nlohmann::json parsed = nlohmann::json::parse(text);
  CHECK(parsed["schema_version"] == "1");
  CHECK(parsed["gamma"] == 2.5);
  CHECK(parsed["nodes"] == 2);
  CHECK(parsed["certified"] == true);
  CHECK(parsed["missing"].is_null());
  CHECK(parsed["coupling_range"]["upper_inclusive"] == true);
  CHECK(parsed["eigenvalues"][1] == 2.0);

  // key order is insertion order
  const auto pos_schema = text.find("schema_version");
  const auto pos_gamma = text.find("gamma");
  const auto pos_eig = text.find("eigenvalues");
  CHECK(pos_schema < pos_gamma);
  CHECK(pos_gamma < pos_eig);
}

TEST_CASE("string quoting escapes control characters") {
  CHECK(report::quote("a\"b") == "\"a\\\"b\"");
  CHECK(report::quote("line\nbreak") == "\"line\\nbreak\"");
  const nlohmann::json parsed = nlohmann::json::parse(report::quote("tab\there"));
  CHECK(parsed.get<std::string>() == "tab\there");
}

TEST_CASE("matrix serialization") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4.5;
  CHECK(report::matrix_json(m) == "[[1, 2], [3, 4.5]]");
  const nlohmann::json parsed = nlohmann::json::parse(report::matrix_json(m));
  CHECK(parsed[1][1] == 4.5);
}

TEST_CASE("identical inputs produce identical bytes") {
  auto render = [] {
    report::Object obj;
    obj.put("J_global", 2.1213203435596424);
    obj.put_raw("J_modal", report::array_json(std::vector<double>{1.0, 5.0}));
    return obj.str();
  };
  CHECK(render() == render());
}
