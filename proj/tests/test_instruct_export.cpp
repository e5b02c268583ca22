#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "json.hpp"

#include "forge/instruct_export.hpp"
#include "support/generators.hpp"

using namespace forge;

namespace {

// The adder sample from published prompt/response pair.
ModuleRecord add_record() {
  ModuleRecord record;
  record.module_name = "ADD";
  record.ports = {{"in1", PortDirection::Input, BitWidth::resolved(16)},
                  {"in2", PortDirection::Input, BitWidth::resolved(16)},
                  {"out", PortDirection::Output, BitWidth::resolved(16)}};
  record.verilog_code =
      "module ADD  (out, in1, in2);\n\ninput [15:0] in1, in2;\n\noutput reg [15:0] "
      "out;\n\nalways @(*)\n\nout = in1 + in2;\n\nendmodule";
  record.token_count = 22;
  record.description =
      "This module performs combinational addition, computing the sum of two "
      "16-bit inputs to produce a 16-bit output.";
  return record;
}

const char* kExpectedAddPrompt =
    "You are a highly experienced RTL code designer skilled at designing concise, "
    "syntactically correct, and synthesizable Verilog code that functions.\n\n"
    "Generate Verilog code for a module named ADD with the following ports and "
    "description:\n\n"
    "input [15:0] in1, input [15:0] in2, output [15:0] out\n\n"
    "This module performs combinational addition, computing the sum of two 16-bit "
    "inputs to produce a 16-bit output.";

}  // namespace

TEST_CASE("the ADD pair reproduces the published prompt text verbatim") {
  const InstructionPair pair = format_pair(add_record(), 1);
  CHECK(pair.prompt == kExpectedAddPrompt);
  CHECK(pair.response == add_record().verilog_code);
  CHECK(pair.source_id == 1);
  CHECK(pair.token_count == 22);
}

TEST_CASE("scalar ports render without a range") {
  const std::vector<PortSpec> ports = {
      {"clk", PortDirection::Input, BitWidth::resolved(1)},
      {"rst", PortDirection::Input, BitWidth::resolved(1)},
      {"count", PortDirection::Output, BitWidth::resolved(8)}};
  CHECK(render_port_line(ports) == "input clk, input rst, output [7:0] count");
}

TEST_CASE("portless records render the sentinel") {
  CHECK(render_port_line({}) == "(no ports)");
  ModuleRecord record = add_record();
  record.ports.clear();
  const InstructionPair pair = format_pair(record, 2);
  CHECK(pair.prompt.find("(no ports)") != std::string::npos);
}

TEST_CASE("inout ports keep their direction keyword") {
  const std::vector<PortSpec> ports = {
      {"bus", PortDirection::Inout, BitWidth::resolved(4)}};
  CHECK(render_port_line(ports) == "inout [3:0] bus");
}

TEST_CASE("formatting is deterministic and injective over source ids") {
  std::mt19937 rng(314);
  std::set<std::string> prompts_with_ids;
  for (int i = 0; i < 100; ++i) {
    const ModuleRecord record = testgen::random_record(rng);
    const InstructionPair a = format_pair(record, i);
    const InstructionPair b = format_pair(record, i);
    CHECK(a == b);
    CHECK(a.response == record.verilog_code);
    CHECK(a.prompt.rfind(std::string(kSystemPrompt), 0) == 0);
    prompts_with_ids.insert(a.prompt + "#" + std::to_string(a.source_id));
  }
  CHECK(prompts_with_ids.size() == 100);
}

TEST_CASE("presets name the published context windows") {
  CHECK(preset_budget("codellama7b") == 4096);
  CHECK(preset_budget("mistral7b") == 8192);
  CHECK_FALSE(preset_budget("gpt99").has_value());
}

TEST_CASE("export honors the token budget") {
  ModuleStore store(":memory:");
  store.init_schema();

  auto insert_sized = [&](const std::string& name, std::int64_t tokens) {
    ModuleRecord record;
    record.module_name = name;
    record.verilog_code = "module " + name + ";\nendmodule";
    record.token_count = tokens;
    record.description = "Module " + name + ".";
    record.ports = {{"a", PortDirection::Input, BitWidth::resolved(1)}};
    REQUIRE(std::holds_alternative<ModuleStore::Inserted>(store.insert_record(record)));
  };
  insert_sized("small", 100);
  insert_sized("medium", 3000);
  insert_sized("huge", 5000);

  const auto out = std::filesystem::temp_directory_path() / "forge_pairs.jsonl";

  SUBCASE("budget 4096 skips the 5000-token module") {
    const auto counts = export_pairs(store, 4096, out);
    CHECK(counts.emitted == 2);
    CHECK(counts.skipped == 1);
  }
  SUBCASE("budget 0 emits nothing") {
    const auto counts = export_pairs(store, 0, out);
    CHECK(counts.emitted == 0);
    CHECK(counts.skipped == 3);
  }
  SUBCASE("no budget emits the whole store") {
    const auto counts = export_pairs(store, std::nullopt, out);
    CHECK(counts.emitted == store.module_count());
    CHECK(counts.skipped == 0);
  }
  SUBCASE("budget property holds for random budgets") {
    std::mt19937 rng(8);
    for (int i = 0; i < 20; ++i) {
      const std::int64_t budget = static_cast<std::int64_t>(rng() % 6000);
      const auto counts = export_pairs(store, budget, out);
      std::ifstream in(out);
      std::string line;
      std::int64_t max_tokens = 0;
      std::int64_t lines = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++lines;
        const auto j = nlohmann::json::parse(line);
        max_tokens = std::max(max_tokens, j.at("token_count").get<std::int64_t>());
      }
      CHECK(lines == counts.emitted);
      if (counts.emitted > 0) CHECK(max_tokens <= budget);
    }
  }
  std::filesystem::remove(out);
}

TEST_CASE("emitted pairs parse back with the response byte-identical") {
  ModuleStore store(":memory:");
  store.init_schema();
  ModuleRecord record = add_record();
  REQUIRE(std::holds_alternative<ModuleStore::Inserted>(store.insert_record(record)));

  const auto out = std::filesystem::temp_directory_path() / "forge_pairs2.jsonl";
  export_pairs(store, std::nullopt, out);
  std::ifstream in(out);
  std::string line;
  REQUIRE(std::getline(in, line));
  const auto j = nlohmann::json::parse(line);
  CHECK(j.at("response").get<std::string>() == record.verilog_code);
  CHECK(j.at("prompt").get<std::string>() == kExpectedAddPrompt);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  std::sort(keys.begin(), keys.end());
  CHECK(keys == std::vector<std::string>{"prompt", "response", "source_id",
                                         "token_count"});
  std::filesystem::remove(out);
}
