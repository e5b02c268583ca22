#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "forge/corpus_model.hpp"
#include "forge/ingest_filter.hpp"
#include "forge/metadata_extract.hpp"
#include "forge/persistence.hpp"

namespace forge {

class StageFailure : public std::runtime_error {
 public:
  StageFailure(Stage stage, const std::string& detail)
      : std::runtime_error(std::string(stage_to_string(stage)) + ": " + detail),
        stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

struct PipelineConfig {
  std::filesystem::path root;  // corpus input tree
  std::filesystem::path work;  // staging area
  std::vector<Stage> stages{Stage::Filter, Stage::Dedup, Stage::Syntax,
                            Stage::Synthesis, Stage::DbValidation};
  int jobs = 0;  // 0 = hardware concurrency
  bool dry_run = false;
  std::string origin_label = "local";

  FilterConfig filter;

  std::string syntax_backend = "stub";  // "stub" | "iverilog"
  std::string syntax_tool = "iverilog";
  int syntax_timeout_secs = 30;

  std::string synth_backend = "stub";  // "stub" | "yosys"
  std::string synth_tool = "yosys";
  int synth_timeout_secs = 120;
  int max_scenarios = 64;
  int probe_budget = 8;

  std::string describe_mode = "fallback";  // "fallback" | "external"
  EndpointConfig endpoint;

  std::string db_path;  // empty: <work>/forge.db
  PortlessExemptions exemptions;
};

// Staging directory for one stage's output under the work root.
std::string stage_directory_name(Stage stage);

// Reads the config document and applies it over the defaults. CLI flags are
// applied on top by the caller.
PipelineConfig pipeline_config_from_file(const std::filesystem::path& path);

std::optional<Stage> stage_from_cli_name(std::string_view name);

struct PipelineResult {
  int exit_code = 0;
  std::string error;  // set when a stage failed and the run halted
  std::vector<StageReport> stage_reports;  // for completed stages, in order
  long long inserted_modules = 0;
  std::string consolidated_json;
  std::string table_text;
  std::vector<std::string> summary_lines;  // one human line per stage
};

// Executes the enabled stages in pipeline order, each reading the previous
// stage's staging directory and writing its own next to a JSON report.
// Deterministic with stub backends: identical inputs and config reproduce
// byte-identical staging trees, reports, and exports.
PipelineResult run_pipeline(const PipelineConfig& config);

// Loads every `.v` file under `dir` as a SourceFile with `dir`-relative
// paths; the first path segment becomes the project id. Canonical order.
std::vector<SourceFile> load_source_tree(const std::filesystem::path& dir,
                                         const Origin& origin = {});

// Groups files by project id, preserving canonical order inside each unit.
std::vector<ProjectUnit> group_projects(const std::vector<SourceFile>& files,
                                        const std::filesystem::path& root);

// Writes one `<module_name>.json` per record into `dir`, suffixing `-<n>`
// on name collisions. Returns the file names in record order.
std::vector<std::string> write_record_files(const std::vector<ModuleRecord>& records,
                                            const std::filesystem::path& dir);

}  // namespace forge
