#include "forge/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include "json.hpp"

#include "forge/analytics.hpp"
#include "forge/config.hpp"
#include "forge/dedup.hpp"
#include "forge/subprocess.hpp"
#include "forge/syntax_check.hpp"
#include "forge/synth_check.hpp"

namespace forge {

std::string stage_directory_name(Stage stage) {
  switch (stage) {
    case Stage::Filter: return "01_filtered";
    case Stage::Dedup: return "02_unique";
    case Stage::Syntax: return "03_syntax_ok";
    case Stage::Synthesis: return "04_synth_ok";
    case Stage::DbValidation: return "05_records";
  }
  return "";
}

std::optional<Stage> stage_from_cli_name(std::string_view name) {
  if (name == "filter" || name == "ingest") return Stage::Filter;
  if (name == "dedup") return Stage::Dedup;
  if (name == "syntax") return Stage::Syntax;
  if (name == "synth" || name == "synthesis") return Stage::Synthesis;
  if (name == "db" || name == "extract") return Stage::DbValidation;
  return std::nullopt;
}

PipelineConfig pipeline_config_from_file(const std::filesystem::path& path) {
  const ConfigFile cfg = ConfigFile::load(path);
  PipelineConfig out;

  out.root = cfg.get_string("pipeline", "root");
  out.work = cfg.get_string("pipeline", "work", "work");
  out.jobs = static_cast<int>(cfg.get_int("pipeline", "jobs", 0));
  out.origin_label = cfg.get_string("pipeline", "origin", "local");
  if (cfg.has("pipeline", "stages")) {
    out.stages.clear();
    for (const std::string& name : cfg.get_string_list("pipeline", "stages")) {
      const auto stage = stage_from_cli_name(name);
      if (!stage) throw ConfigError("unknown stage name: " + name);
      out.stages.push_back(*stage);
    }
  }

  if (cfg.has("filter", "path_excludes"))
    out.filter.path_excludes = cfg.get_string_list("filter", "path_excludes");
  if (cfg.has("filter", "suffix_excludes"))
    out.filter.suffix_excludes = cfg.get_string_list("filter", "suffix_excludes");
  if (cfg.has("filter", "testbench_markers"))
    out.filter.testbench_markers = cfg.get_string_list("filter", "testbench_markers");
  if (cfg.has("filter", "content_excludes"))
    out.filter.content_excludes = cfg.get_string_list("filter", "content_excludes");

  out.syntax_backend = cfg.get_string("syntax", "backend", out.syntax_backend);
  out.syntax_tool = cfg.get_string("syntax", "tool_path", out.syntax_tool);
  out.syntax_timeout_secs =
      static_cast<int>(cfg.get_int("syntax", "timeout_secs", out.syntax_timeout_secs));

  out.synth_backend = cfg.get_string("synth", "backend", out.synth_backend);
  out.synth_tool = cfg.get_string("synth", "tool_path", out.synth_tool);
  out.synth_timeout_secs =
      static_cast<int>(cfg.get_int("synth", "timeout_secs", out.synth_timeout_secs));
  out.max_scenarios =
      static_cast<int>(cfg.get_int("synth", "max_scenarios", out.max_scenarios));
  out.probe_budget =
      static_cast<int>(cfg.get_int("synth", "probe_budget", out.probe_budget));

  out.describe_mode = cfg.get_string("describe", "mode", out.describe_mode);
  out.endpoint.host = cfg.get_string("describe", "host", "");
  out.endpoint.port = static_cast<int>(cfg.get_int("describe", "port", 443));
  out.endpoint.https = cfg.get_bool("describe", "https", true);
  out.endpoint.path = cfg.get_string("describe", "path", out.endpoint.path);
  out.endpoint.model = cfg.get_string("describe", "model", out.endpoint.model);
  out.endpoint.api_key = cfg.get_string("describe", "api_key", "");

  out.db_path = cfg.get_string("db", "path", "");
  if (cfg.has("db", "portless_exemptions")) {
    out.exemptions.name_substrings = cfg.get_string_list("db", "portless_exemptions");
  }
  return out;
}

std::vector<SourceFile> load_source_tree(const std::filesystem::path& dir,
                                         const Origin& origin) {
  std::vector<SourceFile> files;
  if (!std::filesystem::exists(dir)) return files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".v") continue;
    SourceFile file;
    file.path = std::filesystem::relative(entry.path(), dir).generic_string();
    file.origin = origin;
    const std::size_t slash = file.path.find('/');
    file.project_id = slash == std::string::npos ? "" : file.path.substr(0, slash);
    std::ifstream in(entry.path(), std::ios::binary);
    file.content.assign(std::istreambuf_iterator<char>(in),
                        std::istreambuf_iterator<char>());
    files.push_back(std::move(file));
  }
  std::sort(files.begin(), files.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
  return files;
}

std::vector<ProjectUnit> group_projects(const std::vector<SourceFile>& files,
                                        const std::filesystem::path& root) {
  std::map<std::string, ProjectUnit> by_id;
  for (const SourceFile& file : files) {
    const std::string id = file.project_id.empty() ? "." : file.project_id;
    auto [it, inserted] = by_id.try_emplace(id);
    if (inserted) {
      it->second.project_id = id;
      it->second.root = (root / id).generic_string();
    }
    it->second.files.push_back(file);
  }
  std::vector<ProjectUnit> projects;
  projects.reserve(by_id.size());
  for (auto& [id, project] : by_id) projects.push_back(std::move(project));
  return projects;
}

std::vector<std::string> write_record_files(const std::vector<ModuleRecord>& records,
                                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<std::string, int> seen;
  std::vector<std::string> names;
  for (const ModuleRecord& record : records) {
    const int n = ++seen[record.module_name];
    std::string name = record.module_name;
    if (n > 1) name += "-" + std::to_string(n);
    name += ".json";
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << serialize_record(record) << '\n';
    names.push_back(std::move(name));
  }
  return names;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void reset_directory(const std::filesystem::path& dir) {
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
}

std::string summarize(const StageReport& report) {
  std::string line = std::string(stage_to_string(report.stage)) + ": " +
                     std::to_string(report.input_count) + " in, " +
                     std::to_string(report.output_count) + " out";
  const auto retention = report.retention_percent();
  if (retention) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, " (%.2f%% retained)", *retention);
    line += buffer;
  }
  line += ", " + std::to_string(report.rejections.size()) + " rejected";
  return line;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;

  // Normalize requested stages into pipeline order, dropping duplicates.
  const Stage kOrder[] = {Stage::Filter, Stage::Dedup, Stage::Syntax,
                          Stage::Synthesis, Stage::DbValidation};
  std::set<Stage> requested(config.stages.begin(), config.stages.end());
  std::vector<Stage> stages;
  for (const Stage s : kOrder) {
    if (requested.count(s)) stages.push_back(s);
  }
  if (stages.empty()) {
    result.exit_code = 2;
    result.error = "no stages enabled";
    return result;
  }

  if (config.dry_run) {
    for (const Stage s : stages) {
      result.summary_lines.push_back(std::string("would run ") +
                                     std::string(stage_to_string(s)));
    }
    return result;
  }

  const Origin origin = origin_from_string(config.origin_label);
  const std::filesystem::path work = config.work;
  std::filesystem::create_directories(work);
  const std::string db_path =
      config.db_path.empty() ? (work / "forge.db").string() : config.db_path;

  auto stage_dir = [&](Stage s) { return work / stage_directory_name(s); };
  auto report_path = [&](Stage s) {
    return work / (stage_directory_name(s) + ".report.json");
  };
  auto input_dir_for = [&](Stage s) -> std::filesystem::path {
    // The staging directory of the closest earlier tree-producing stage.
    const Stage inputs[] = {Stage::Filter, Stage::Dedup, Stage::Syntax,
                            Stage::Synthesis};
    std::filesystem::path dir;
    for (const Stage candidate : inputs) {
      if (candidate >= s) break;
      dir = stage_dir(candidate);
    }
    return dir;
  };

  try {
    for (const Stage stage : stages) {
      StageReport report;
      switch (stage) {
        case Stage::Filter: {
          if (!std::filesystem::exists(config.root)) {
            throw StageFailure(stage, "input root does not exist: " +
                                          config.root.string());
          }
          ScanResult scan = scan_projects(config.root, config.filter, origin);
          report = scan.report;
          reset_directory(stage_dir(stage));
          for (const ProjectUnit& project : scan.projects) {
            write_staging_tree(project.files, stage_dir(stage), nullptr, &report);
          }
          break;
        }
        case Stage::Dedup: {
          const auto in_dir = input_dir_for(stage);
          if (!std::filesystem::exists(in_dir)) {
            throw StageFailure(stage, "input missing: " + in_dir.string() +
                                          " (run earlier stages first)");
          }
          const std::vector<SourceFile> files = load_source_tree(in_dir, origin);
          DedupResult dedup = deduplicate(files);
          report = dedup.report;
          reset_directory(stage_dir(stage));
          write_staging_tree(dedup.survivors, stage_dir(stage), &in_dir, &report);
          write_text(work / "02_unique.dedup.json", dedup_report_json(dedup));
          break;
        }
        case Stage::Syntax: {
          const auto in_dir = input_dir_for(stage);
          if (!std::filesystem::exists(in_dir)) {
            throw StageFailure(stage, "input missing: " + in_dir.string());
          }
          const std::vector<SourceFile> files = load_source_tree(in_dir, origin);
          std::unique_ptr<CompilerBackend> backend;
          if (config.syntax_backend == "stub") {
            backend = std::make_unique<StubCompilerBackend>();
          } else if (config.syntax_backend == "iverilog") {
            backend = std::make_unique<IcarusBackend>(
                config.syntax_tool,
                std::vector<std::string>{"-o", "{devnull}", "-Wall", "{file}"},
                std::chrono::seconds(config.syntax_timeout_secs));
          } else {
            throw StageFailure(stage,
                               "unknown syntax backend: " + config.syntax_backend);
          }
          SyntaxStageResult res =
              run_syntax_stage(files, *backend, TriageRules{}, config.jobs);
          report = res.report;
          reset_directory(stage_dir(stage));
          write_staging_tree(res.passed, stage_dir(stage), &in_dir, &report);
          write_text(work / "03_syntax_ok.failures.jsonl", syntax_failure_log(res));
          break;
        }
        case Stage::Synthesis: {
          const auto in_dir = input_dir_for(stage);
          if (!std::filesystem::exists(in_dir)) {
            throw StageFailure(stage, "input missing: " + in_dir.string());
          }
          const std::vector<SourceFile> files = load_source_tree(in_dir, origin);
          const std::vector<ProjectUnit> projects = group_projects(files, in_dir);
          std::unique_ptr<SynthBackend> backend;
          if (config.synth_backend == "stub") {
            backend = std::make_unique<StubSynthBackend>();
          } else if (config.synth_backend == "yosys") {
            if (!tool_exists(config.synth_tool)) {
              throw StageFailure(stage, "synthesizer tool not found: " +
                                            config.synth_tool);
            }
            backend = std::make_unique<YosysBackend>(
                config.synth_tool, std::chrono::seconds(config.synth_timeout_secs));
          } else {
            throw StageFailure(stage,
                               "unknown synth backend: " + config.synth_backend);
          }
          SynthCheckOptions options;
          options.max_scenarios = static_cast<std::size_t>(config.max_scenarios);
          options.probe_budget = static_cast<std::size_t>(config.probe_budget);
          SynthStageResult res = run_synth_stage(projects, *backend, options,
                                                 config.jobs);
          report = res.report;
          reset_directory(stage_dir(stage));
          write_staging_tree(res.passed, stage_dir(stage), &in_dir, &report);
          std::string project_log;
          for (const ProjectSynthOutcome& outcome : res.outcomes) {
            project_log += synth_project_log(outcome);
            project_log += '\n';
          }
          write_text(work / "04_synth_ok.projects.jsonl", project_log);
          break;
        }
        case Stage::DbValidation: {
          const auto in_dir = input_dir_for(stage);
          if (!std::filesystem::exists(in_dir)) {
            throw StageFailure(stage, "input missing: " + in_dir.string());
          }
          const std::vector<SourceFile> files = load_source_tree(in_dir, origin);

          std::unique_ptr<DescriptionClient> client;
          if (config.describe_mode == "external" && !config.endpoint.host.empty()) {
            client = std::make_unique<ExternalModelClient>(config.endpoint);
          } else {
            client = std::make_unique<TemplateFallbackClient>();
          }
          ExtractResult extract = extract_records(files, *client);
          report = extract.report;

          std::filesystem::remove(db_path);
          ModuleStore store(db_path);
          store.init_schema();
          std::vector<ModuleRecord> inserted;
          report.output_count = 0;
          report.output_bytes = 0;
          for (std::size_t i = 0; i < extract.records.size(); ++i) {
            const ModuleRecord& record = extract.records[i];
            const auto outcome = store.insert_record(record, config.exemptions);
            if (std::holds_alternative<ModuleStore::Inserted>(outcome)) {
              inserted.push_back(record);
              ++report.output_count;
              report.output_bytes +=
                  static_cast<std::int64_t>(record.verilog_code.size());
            } else {
              report.rejections.push_back(
                  {extract.record_sources[i] + ":" + record.module_name,
                   std::get<ModuleStore::Rejected>(outcome).reason});
            }
          }
          reset_directory(stage_dir(stage));
          write_record_files(inserted, stage_dir(stage));
          store.export_jsonl(work / "dataset.jsonl");
          result.inserted_modules = static_cast<long long>(inserted.size());

          const CorpusStats stats = compute_stats(inserted);
          std::vector<StageReport> all_reports = result.stage_reports;
          all_reports.push_back(report);
          const ReportBundle bundle = render_report(&stats, all_reports);
          write_text(work / "report.json", bundle.report_json);
          write_text(work / "table1.txt", bundle.table_text);
          for (const auto& [name, csv] : bundle.csvs) {
            write_text(work / name, csv);
          }
          result.consolidated_json = bundle.report_json;
          result.table_text = bundle.table_text;
          break;
        }
      }
      write_text(report_path(stage), stage_report_to_json(report));
      result.stage_reports.push_back(report);
      result.summary_lines.push_back(summarize(report));
    }

    // Runs that stop before the DB stage still get a consolidated report.
    if (result.consolidated_json.empty()) {
      const ReportBundle bundle = render_report(nullptr, result.stage_reports);
      write_text(work / "report.json", bundle.report_json);
      write_text(work / "table1.txt", bundle.table_text);
      result.consolidated_json = bundle.report_json;
      result.table_text = bundle.table_text;
    }
  } catch (const StageFailure& e) {
    result.exit_code = 1;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.error = e.what();
  }
  return result;
}

}  // namespace forge
