#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "forge/persistence.hpp"
#include "forge/pipeline.hpp"

using namespace forge;

namespace {

const std::filesystem::path kCorpus =
    std::filesystem::path(FORGE_FIXTURE_DIR) / "corpus";

struct TempWork {
  std::filesystem::path dir;
  explicit TempWork(const std::string& name) {
    dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
  }
  ~TempWork() { std::filesystem::remove_all(dir); }
};

PipelineConfig stub_config(const std::filesystem::path& work) {
  PipelineConfig config;
  config.root = kCorpus;
  config.work = work;
  config.syntax_backend = "stub";
  config.synth_backend = "stub";
  config.jobs = 2;
  return config;
}

}  // namespace

TEST_CASE("full pipeline run over the bundled corpus") {
  TempWork work("forge_pipe_full");
  const PipelineResult result = run_pipeline(stub_config(work.dir));
  REQUIRE(result.error.empty());
  CHECK(result.exit_code == 0);
  REQUIRE(result.stage_reports.size() == 5);

  // Hand-derived expectations for the bundled corpus.
  const StageReport& filter = result.stage_reports[0];
  CHECK(filter.stage == Stage::Filter);
  CHECK(filter.input_count == 30);
  CHECK(filter.output_count == 25);
  CHECK(filter.rejections.size() == 5);
  REQUIRE(filter.annotations.size() == 1);
  CHECK(filter.annotations[0].path == "proj_crypto/rng.v");

  const StageReport& dedup = result.stage_reports[1];
  CHECK(dedup.input_count == 25);
  CHECK(dedup.output_count == 23);

  const StageReport& syntax = result.stage_reports[2];
  CHECK(syntax.input_count == 23);
  CHECK(syntax.output_count == 22);
  REQUIRE(syntax.rejections.size() == 1);
  CHECK(syntax.rejections[0].path == "proj_dsp/broken.v");

  const StageReport& synth = result.stage_reports[3];
  CHECK(synth.input_count == 22);
  CHECK(synth.output_count == 21);
  REQUIRE(synth.rejections.size() == 1);
  CHECK(synth.rejections[0].path == "proj_counters/counter_a.v");

  const StageReport& db = result.stage_reports[4];
  CHECK(db.input_count == 21);
  CHECK(db.output_count == 20);
  CHECK(db.rejections.size() == 2);
  CHECK(result.inserted_modules == 20);

  // Staging layout and reports on disk.
  for (const char* name :
       {"01_filtered", "02_unique", "03_syntax_ok", "04_synth_ok", "05_records"}) {
    CHECK(std::filesystem::is_directory(work.dir / name));
    CHECK(std::filesystem::exists(work.dir / (std::string(name) + ".report.json")));
  }
  CHECK(std::filesystem::exists(work.dir / "report.json"));
  CHECK(std::filesystem::exists(work.dir / "table1.txt"));
  CHECK(std::filesystem::exists(work.dir / "dataset.jsonl"));

  // The collision survivor set: counter_b participates, counter_a does not.
  CHECK(std::filesystem::exists(work.dir / "04_synth_ok" / "proj_counters" /
                                "counter_b.v"));
  CHECK_FALSE(std::filesystem::exists(work.dir / "04_synth_ok" / "proj_counters" /
                                      "counter_a.v"));

  // The store agrees with the report.
  ModuleStore store((work.dir / "forge.db").string());
  CHECK(store.module_count() == 20);
}

TEST_CASE("single-stage runs consume earlier staging output") {
  TempWork work("forge_pipe_only");
  PipelineConfig full = stub_config(work.dir);
  REQUIRE(run_pipeline(full).error.empty());

  PipelineConfig only_dedup = full;
  only_dedup.stages = {Stage::Dedup};
  const PipelineResult result = run_pipeline(only_dedup);
  REQUIRE(result.error.empty());
  REQUIRE(result.stage_reports.size() == 1);
  CHECK(result.stage_reports[0].stage == Stage::Dedup);
  CHECK(result.stage_reports[0].input_count == 25);
}

TEST_CASE("a stage without its input halts with a failure") {
  TempWork work("forge_pipe_missing");
  PipelineConfig config = stub_config(work.dir);
  config.stages = {Stage::Synthesis};
  const PipelineResult result = run_pipeline(config);
  CHECK(result.exit_code != 0);
  CHECK(result.error.find("Synthesis") != std::string::npos);
  CHECK(result.stage_reports.empty());
}

TEST_CASE("missing external synthesizer is a stage failure") {
  TempWork work("forge_pipe_notool");
  PipelineConfig config = stub_config(work.dir);
  config.synth_backend = "yosys";
  config.synth_tool = "definitely-not-a-real-tool-name-zzz";
  const PipelineResult result = run_pipeline(config);
  CHECK(result.exit_code != 0);
  CHECK(result.error.find("Synthesis") != std::string::npos);
  // Earlier stages completed before the halt.
  CHECK(result.stage_reports.size() == 3);
}

TEST_CASE("dry run only lists the plan") {
  TempWork work("forge_pipe_dry");
  PipelineConfig config = stub_config(work.dir);
  config.dry_run = true;
  const PipelineResult result = run_pipeline(config);
  CHECK(result.exit_code == 0);
  CHECK(result.summary_lines.size() == 5);
  CHECK_FALSE(std::filesystem::exists(work.dir / "01_filtered"));
}

TEST_CASE("pipeline config reads the TOML-style document") {
  TempWork work("forge_pipe_cfg");
  std::filesystem::create_directories(work.dir);
  const auto cfg_path = work.dir / "forge.toml";
  {
    std::ofstream out(cfg_path);
    out << "[pipeline]\n"
           "root = \"corpus\"\n"
           "work = \"workdir\"\n"
           "jobs = 3\n"
           "stages = [\"filter\", \"dedup\"]\n"
           "[filter]\n"
           "path_excludes = [\"junk\"]\n"
           "[syntax]\n"
           "backend = \"stub\"\n"
           "timeout_secs = 5\n"
           "[synth]\n"
           "backend = \"stub\"\n"
           "max_scenarios = 16\n"
           "probe_budget = 2\n"
           "[db]\n"
           "portless_exemptions = [\"fillcell\"]\n";
  }
  const PipelineConfig config = pipeline_config_from_file(cfg_path);
  CHECK(config.root == "corpus");
  CHECK(config.work == "workdir");
  CHECK(config.jobs == 3);
  CHECK(config.stages == std::vector<Stage>{Stage::Filter, Stage::Dedup});
  CHECK(config.filter.path_excludes == std::vector<std::string>{"junk"});
  CHECK(config.syntax_timeout_secs == 5);
  CHECK(config.max_scenarios == 16);
  CHECK(config.probe_budget == 2);
  CHECK(config.exemptions.name_substrings == std::vector<std::string>{"fillcell"});
}

TEST_CASE("record files get collision suffixes") {
  TempWork work("forge_pipe_records");
  std::filesystem::create_directories(work.dir);
  ModuleRecord a;
  a.module_name = "same";
  a.verilog_code = "module same; endmodule";
  a.token_count = 3;
  a.description = "First.";
  ModuleRecord b = a;
  b.verilog_code = "module same ; endmodule";
  const auto names = write_record_files({a, b}, work.dir);
  CHECK(names == std::vector<std::string>{"same.json", "same-2.json"});
  CHECK(std::filesystem::exists(work.dir / "same.json"));
  CHECK(std::filesystem::exists(work.dir / "same-2.json"));
}

TEST_CASE("load_source_tree orders canonically and tags projects") {
  const auto files = load_source_tree(kCorpus);
  REQUIRE_FALSE(files.empty());
  CHECK(std::is_sorted(files.begin(), files.end(),
                       [](const SourceFile& a, const SourceFile& b) {
                         return a.path < b.path;
                       }));
  CHECK(files.front().project_id == "proj_alu");

  const auto projects = group_projects(files, kCorpus);
  CHECK(projects.size() == 4);
}
