#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "forge/persistence.hpp"
#include "support/generators.hpp"

using namespace forge;

namespace {

ModuleRecord dec_record() {
  ModuleRecord record;
  record.module_name = "dec";
  record.ports = {{"I", PortDirection::Input, BitWidth::resolved(2)},
                  {"v", PortDirection::Input, BitWidth::resolved(1)},
                  {"y", PortDirection::Output, BitWidth::resolved(4)}};
  record.verilog_code = "module dec (\n input [1:0] I\n);\nendmodule";
  record.token_count = 35;
  record.description = "This module decodes a 2-bit input.";
  return record;
}

bool inserted(const ModuleStore::InsertOutcome& outcome) {
  return std::holds_alternative<ModuleStore::Inserted>(outcome);
}

std::string rejection_reason(const ModuleStore::InsertOutcome& outcome) {
  return std::get<ModuleStore::Rejected>(outcome).reason;
}

struct TempDb {
  std::filesystem::path path;
  explicit TempDb(const std::string& name) {
    path = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove(path);
  }
  ~TempDb() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("schema init is idempotent") {
  ModuleStore store(":memory:");
  store.init_schema();
  store.init_schema();
  CHECK(store.module_count() == 0);
}

TEST_CASE("valid record inserts with its port rows") {
  ModuleStore store(":memory:");
  store.init_schema();
  const auto outcome = store.insert_record(dec_record());
  REQUIRE(inserted(outcome));

  const auto rows = store.query_modules();
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].record == dec_record());
  CHECK(rows[0].record.ports.size() == 3);
}

TEST_CASE("identical code is denied a second insertion") {
  ModuleStore store(":memory:");
  store.init_schema();
  REQUIRE(inserted(store.insert_record(dec_record())));
  const auto second = store.insert_record(dec_record());
  REQUIRE_FALSE(inserted(second));
  CHECK(rejection_reason(second) == "duplicate verilog_code");
  CHECK(store.module_count() == 1);
}

TEST_CASE("unresolved widths are rejected with zero partial rows") {
  ModuleStore store(":memory:");
  store.init_schema();
  ModuleRecord record = dec_record();
  record.ports[1].bit_width = BitWidth::unresolved("`W-1:0");
  const auto outcome = store.insert_record(record);
  REQUIRE_FALSE(inserted(outcome));
  CHECK(rejection_reason(outcome).find("unresolved port width") == 0);
  CHECK(store.module_count() == 0);
  CHECK(store.query_modules().empty());
}

TEST_CASE("portless records need the exemption list") {
  ModuleStore store(":memory:");
  store.init_schema();

  ModuleRecord plain = dec_record();
  plain.module_name = "empty_stub";
  plain.ports.clear();
  plain.verilog_code = "module empty_stub;\nendmodule";
  const auto denied = store.insert_record(plain);
  REQUIRE_FALSE(inserted(denied));
  CHECK(rejection_reason(denied) == "portless module not on the exemption list");

  ModuleRecord exempt = plain;
  exempt.module_name = "decap_filler_wrapper";
  exempt.verilog_code = "module decap_filler_wrapper;\nendmodule";
  CHECK(inserted(store.insert_record(exempt)));
}

TEST_CASE("duplicate port names within a record are rejected atomically") {
  ModuleStore store(":memory:");
  store.init_schema();
  ModuleRecord record = dec_record();
  record.ports.push_back(record.ports.front());
  const auto outcome = store.insert_record(record);
  REQUIRE_FALSE(inserted(outcome));
  CHECK(rejection_reason(outcome).find("duplicate port name") == 0);
  CHECK(store.module_count() == 0);
}

TEST_CASE("null-equivalent fields are denied") {
  ModuleStore store(":memory:");
  store.init_schema();
  ModuleRecord record = dec_record();
  record.description.clear();
  REQUIRE_FALSE(inserted(store.insert_record(record)));
}

TEST_CASE("concurrent identical inserts admit exactly one") {
  TempDb db("forge_concurrent.db");
  {
    ModuleStore store(db.path.string());
    store.init_schema();
  }
  constexpr int kThreads = 8;
  std::atomic<int> successes{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < kThreads; ++i) {
    threads.emplace_back([&] {
      ModuleStore store(db.path.string());
      if (inserted(store.insert_record(dec_record()))) successes.fetch_add(1);
    });
  }
  for (auto& t : threads) t.join();
  CHECK(successes.load() == 1);
  ModuleStore store(db.path.string());
  CHECK(store.module_count() == 1);
}

TEST_CASE("query filters match an independent oracle") {
  ModuleStore store(":memory:");
  store.init_schema();

  std::mt19937 rng(11);
  std::vector<ModuleRecord> accepted;
  for (int i = 0; i < 60; ++i) {
    ModuleRecord record = testgen::random_record(rng);
    record.module_name = "mod_" + std::to_string(i);
    record.verilog_code = "module mod_" + std::to_string(i) + ";\n// v" +
                          std::to_string(i) + "\nendmodule";
    if (inserted(store.insert_record(record))) accepted.push_back(record);
  }
  REQUIRE_FALSE(accepted.empty());

  QueryFilter filter;
  filter.token_range = {{0, 200}};
  const auto rows = store.query_modules(filter);
  std::size_t oracle = 0;
  for (const ModuleRecord& r : accepted) {
    if (r.token_count <= 200) ++oracle;
  }
  CHECK(rows.size() == oracle);
  for (const auto& row : rows) CHECK(row.record.token_count <= 200);

  QueryFilter impossible;
  impossible.token_range = {{10, 5}};
  CHECK(store.query_modules(impossible).empty());

  QueryFilter named;
  named.name_pattern = "mod_1";
  const auto by_name = store.query_modules(named);
  CHECK_FALSE(by_name.empty());
  for (const auto& row : by_name) {
    CHECK(row.record.module_name.find("mod_1") != std::string::npos);
  }

  QueryFilter by_ports;
  by_ports.port_count_range = {{1, 2}};
  for (const auto& row : store.query_modules(by_ports)) {
    CHECK(row.record.ports.size() >= 1);
    CHECK(row.record.ports.size() <= 2);
  }
}

TEST_CASE("export then import into a fresh store preserves row counts") {
  TempDb jsonl("forge_roundtrip.jsonl");
  ModuleStore first(":memory:");
  first.init_schema();
  std::mt19937 rng(5);
  long long count = 0;
  for (int i = 0; i < 25; ++i) {
    ModuleRecord record = testgen::random_record(rng);
    // Comments survive the store's newline-joined column only when they have
    // no embedded newlines themselves.
    for (auto& c : record.comments) {
      for (auto& ch : c) {
        if (ch == '\n') ch = ' ';
      }
    }
    record.verilog_code = "module u" + std::to_string(i) + ";\nendmodule";
    record.module_name = "u" + std::to_string(i);
    if (record.ports.empty()) {
      record.ports.push_back({"x", PortDirection::Input, BitWidth::resolved(1)});
    }
    for (auto& port : record.ports) {
      if (!port.bit_width.is_resolved()) port.bit_width = BitWidth::resolved(2);
    }
    if (inserted(first.insert_record(record))) ++count;
  }
  REQUIRE(count > 0);
  CHECK(first.export_jsonl(jsonl.path).exported == count);

  ModuleStore second(":memory:");
  second.init_schema();
  const auto imported = second.import_jsonl(jsonl.path);
  CHECK(imported.imported == count);
  CHECK(imported.rejected == 0);
  CHECK(second.module_count() == count);

  // A second export is byte-identical to the first.
  TempDb again("forge_roundtrip2.jsonl");
  second.export_jsonl(again.path);
  std::ifstream a(jsonl.path), b(again.path);
  const std::string text_a((std::istreambuf_iterator<char>(a)),
                           std::istreambuf_iterator<char>());
  const std::string text_b((std::istreambuf_iterator<char>(b)),
                           std::istreambuf_iterator<char>());
  CHECK(text_a == text_b);
}

TEST_CASE("import rejects malformed lines without aborting") {
  TempDb jsonl("forge_badline.jsonl");
  {
    std::ofstream out(jsonl.path);
    out << serialize_record(dec_record()) << "\n";
    out << R"({"module_name":"x","ports":[],"comments":[],"verilog_code":"c","token_count":1,"description":null})"
        << "\n";
    out << "garbage line\n";
  }
  ModuleStore store(":memory:");
  store.init_schema();
  StageReport report;
  const auto counts = store.import_jsonl(jsonl.path, {}, &report);
  CHECK(counts.imported == 1);
  CHECK(counts.rejected == 2);
  CHECK(report.rejections.size() == 2);
}

TEST_CASE("unreachable store locations raise StoreError") {
  CHECK_THROWS_AS(ModuleStore("/nonexistent-dir-zzz/sub/forge.db"), StoreError);
}

TEST_CASE("sqlite url prefix is accepted") {
  ModuleStore store("sqlite://:memory:");
  store.init_schema();
  CHECK(store.module_count() == 0);
}

TEST_CASE("store location resolution prefers the explicit value") {
  CHECK(resolve_store_location("given.db") == "given.db");
}
