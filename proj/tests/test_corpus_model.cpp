#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "json.hpp"

#include "forge/corpus_model.hpp"
#include "support/generators.hpp"

using namespace forge;

namespace {

// The decoder sample with its published field values.
ModuleRecord dec_record() {
  ModuleRecord record;
  record.module_name = "dec";
  record.ports = {
      {"I", PortDirection::Input, BitWidth::resolved(2)},
      {"v", PortDirection::Input, BitWidth::resolved(1)},
      {"y", PortDirection::Output, BitWidth::resolved(4)},
  };
  record.verilog_code =
      "module dec (\n input [1:0] I,\n input v,\n output reg [3:0] y\n);\n\n "
      "always@(I)\n begin\n case({I,v})\n 3'b001: y = 4'b0001;\n 3'b011: y = "
      "4'b0010;\n 3'b101: y = 4'b0100;\n 3'b111: y = 4'b1000;\n default: "
      "y=4'b0000;\n endcase\n end\nendmodule";
  record.token_count = 35;
  record.description =
      "This module decodes a 2-bit input and control signal into one of four "
      "4-bit outputs.";
  return record;
}

}  // namespace

TEST_CASE("serialize_record emits the six keys in canonical order") {
  const std::string text = serialize_record(dec_record());
  const auto j = nlohmann::ordered_json::parse(text);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"module_name", "ports", "comments",
                                         "verilog_code", "token_count",
                                         "description"});
  CHECK(j["module_name"] == "dec");
  REQUIRE(j["ports"].size() == 3);
  CHECK(j["ports"][0]["name"] == "I");
  CHECK(j["ports"][0]["direction"] == "input");
  CHECK(j["ports"][0]["bit_width"] == 2);
  CHECK(j["ports"][1]["bit_width"] == 1);
  CHECK(j["ports"][2]["direction"] == "output");
  CHECK(j["ports"][2]["bit_width"] == 4);
  CHECK(j["comments"].is_array());
  CHECK(j["comments"].empty());
  CHECK(j["token_count"] == 35);
}

TEST_CASE("serialization format is byte-stable") {
  ModuleRecord record;
  record.module_name = "m";
  record.verilog_code = "module m;\nendmodule";
  record.token_count = 3;
  record.description = "A module.";
  CHECK(serialize_record(record) ==
        R"({"module_name":"m","ports":[],"comments":[],"verilog_code":"module m;\nendmodule","token_count":3,"description":"A module."})");
  CHECK(serialize_record(record) == serialize_record(record));
}

TEST_CASE("empty comments serialize as an empty array") {
  const std::string text = serialize_record(dec_record());
  CHECK(text.find("\"comments\":[]") != std::string::npos);
}

TEST_CASE("code with quotes round-trips through any conformant parser") {
  ModuleRecord record = dec_record();
  record.verilog_code = "module q;\n initial $display(\"hi \\\"there\\\"\");\nendmodule";
  record.module_name = "q";
  const std::string text = serialize_record(record);
  CHECK(deserialize_record(text) == record);
  // Also through the generic parser, not our own deserializer.
  const auto j = nlohmann::json::parse(text);
  CHECK(j["verilog_code"].get<std::string>() == record.verilog_code);
}

TEST_CASE("deserialize rejects a missing field") {
  try {
    deserialize_record(R"({"module_name":"x","comments":[],"verilog_code":"c","token_count":1,"description":"D."})");
    FAIL("expected RecordError");
  } catch (const RecordError& e) {
    CHECK(e.kind() == RecordErrorKind::MissingField);
    CHECK(e.detail() == "ports");
  }
}

TEST_CASE("deserialize rejects unknown keys and malformed input") {
  CHECK_THROWS_AS(deserialize_record("not json at all"), RecordError);
  try {
    deserialize_record(
        R"({"module_name":"x","ports":[],"comments":[],"verilog_code":"c","token_count":1,"description":"D.","extra":1})");
    FAIL("expected RecordError");
  } catch (const RecordError& e) {
    CHECK(e.kind() == RecordErrorKind::InvariantViolation);
  }
  try {
    deserialize_record(
        R"({"module_name":"x","ports":[{"name":"p","direction":"sideways","bit_width":1}],"comments":[],"verilog_code":"c","token_count":1,"description":"D."})");
    FAIL("expected RecordError");
  } catch (const RecordError& e) {
    CHECK(e.kind() == RecordErrorKind::InvariantViolation);
  }
}

TEST_CASE("paper decoder JSON parses into a three-port record") {
  const std::string text = serialize_record(dec_record());
  const ModuleRecord parsed = deserialize_record(text);
  REQUIRE(parsed.ports.size() == 3);
  CHECK(parsed == dec_record());
}

TEST_CASE("round-trip identity over generated records") {
  std::mt19937 rng(20260810);
  for (int i = 0; i < 300; ++i) {
    const ModuleRecord record = testgen::random_record(rng);
    CAPTURE(i);
    CHECK(deserialize_record(serialize_record(record)) == record);
  }
}

TEST_CASE("unresolved widths survive the JSON round trip") {
  ModuleRecord record = dec_record();
  record.ports[0].bit_width = BitWidth::unresolved("`BUS-1:0");
  const ModuleRecord parsed = deserialize_record(serialize_record(record));
  REQUIRE_FALSE(parsed.ports[0].bit_width.is_resolved());
  CHECK(parsed.ports[0].bit_width.expression() == "`BUS-1:0");
}

TEST_CASE("utf8 replacement keeps valid text and replaces garbage") {
  CHECK(utf8_with_replacement("plain ascii") == "plain ascii");
  CHECK(utf8_with_replacement("caf\xC3\xA9") == "caf\xC3\xA9");
  const std::string replaced = utf8_with_replacement("a\xFF\xFE b");
  CHECK(replaced.find("\xEF\xBF\xBD") != std::string::npos);
  CHECK(replaced.find('a') != std::string::npos);
  // Truncated multibyte sequence at end of input.
  CHECK(utf8_with_replacement("x\xC3") == std::string("x") + "\xEF\xBF\xBD");
}

TEST_CASE("description contract checks words and the terminal period") {
  CHECK(description_contract_ok("Short and sweet."));
  CHECK_FALSE(description_contract_ok("No period"));
  CHECK_FALSE(description_contract_ok(""));
  std::string long_text;
  for (int i = 0; i < 41; ++i) long_text += "word ";
  long_text += "end.";
  CHECK_FALSE(description_contract_ok(long_text));
  CHECK(word_count("one two  three\nfour") == 4);
  CHECK(word_count("") == 0);
}

TEST_CASE("validate_record reports violations") {
  ModuleRecord bad;
  bad.description = "no period here";
  const auto violations = validate_record(bad);
  CHECK(violations.size() >= 3);  // name, code, description
  CHECK(validate_record(dec_record()).empty());
}

TEST_CASE("stage report retention matches independent recomputation") {
  std::mt19937 rng(7);
  for (int i = 0; i < 100; ++i) {
    StageReport report;
    report.stage = Stage::Dedup;
    report.input_bytes = static_cast<std::int64_t>(rng() % 100000);
    report.output_bytes =
        report.input_bytes == 0
            ? 0
            : static_cast<std::int64_t>(rng() % (report.input_bytes + 1));
    const auto retention = report.retention_percent();
    if (report.input_bytes == 0) {
      CHECK_FALSE(retention.has_value());
    } else {
      const double expected = 100.0 * static_cast<double>(report.output_bytes) /
                              static_cast<double>(report.input_bytes);
      CHECK(*retention == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("stage reports round-trip through JSON") {
  StageReport report;
  report.stage = Stage::Synthesis;
  report.input_count = 10;
  report.output_count = 7;
  report.input_bytes = 1000;
  report.output_bytes = 700;
  report.rejections = {{"a.v", "no passing scenario (2 attempts)"}};
  report.annotations = {{"b.v", "content initial (heuristic)"}};
  CHECK(stage_report_from_json(stage_report_to_json(report)) == report);
}
