// forge — Verilog corpus curation pipeline CLI.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>

#include "CLI11.hpp"

#include "forge/analytics.hpp"
#include "forge/config.hpp"
#include "forge/dedup.hpp"
#include "forge/ingest_filter.hpp"
#include "forge/instruct_export.hpp"
#include "forge/metadata_extract.hpp"
#include "forge/persistence.hpp"
#include "forge/pipeline.hpp"
#include "forge/subprocess.hpp"
#include "forge/syntax_check.hpp"
#include "forge/synth_check.hpp"

namespace {

using namespace forge;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? "."
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

FilterConfig resolve_filter_config(const std::string& config_path) {
  std::string path = config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("FORGE_CONFIG"); env != nullptr && *env != '\0') {
      path = env;
    }
  }
  if (path.empty()) return FilterConfig{};
  return filter_config_from_file(path);
}

EndpointConfig endpoint_from_file(const std::string& path) {
  EndpointConfig endpoint;
  if (path.empty()) return endpoint;
  const ConfigFile cfg = ConfigFile::load(path);
  endpoint.host = cfg.get_string("describe", "host", "");
  endpoint.port = static_cast<int>(cfg.get_int("describe", "port", 443));
  endpoint.https = cfg.get_bool("describe", "https", true);
  endpoint.path = cfg.get_string("describe", "path", endpoint.path);
  endpoint.model = cfg.get_string("describe", "model", endpoint.model);
  endpoint.api_key = cfg.get_string("describe", "api_key", "");
  return endpoint;
}

int print_report_summary(const StageReport& report) {
  std::cout << stage_to_string(report.stage) << ": " << report.input_count
            << " in, " << report.output_count << " out, "
            << report.rejections.size() << " rejected\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge — Verilog corpus curation pipeline"};
  app.require_subcommand(1);

  try {
    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "Scan project trees and apply filters");
    std::string ingest_root, ingest_config, ingest_out, ingest_origin = "local";
    ingest->add_option("--root", ingest_root, "Corpus root directory")->required();
    ingest->add_option("--config", ingest_config,
                       "Filter config file (FORGE_CONFIG as fallback)");
    ingest->add_option("--out", ingest_out, "Staging directory")->required();
    ingest->add_option("--origin", ingest_origin, "Origin label");
    ingest->callback([&] {
      const FilterConfig config = resolve_filter_config(ingest_config);
      ScanResult scan =
          scan_projects(ingest_root, config, origin_from_string(ingest_origin));
      std::filesystem::create_directories(ingest_out);
      for (const ProjectUnit& project : scan.projects) {
        write_staging_tree(project.files, ingest_out, nullptr, &scan.report);
      }
      write_text_file(std::filesystem::path(ingest_out + ".report.json"),
                      stage_report_to_json(scan.report));
      print_report_summary(scan.report);
    });

    // ---- dedup ----
    auto* dedup_cmd = app.add_subcommand("dedup", "Remove byte-identical duplicates");
    std::string dedup_in, dedup_out, dedup_report;
    dedup_cmd->add_option("--in", dedup_in, "Input staging directory")->required();
    dedup_cmd->add_option("--out", dedup_out, "Output directory")->required();
    dedup_cmd->add_option("--report", dedup_report, "Group report JSON path");
    dedup_cmd->callback([&] {
      const std::vector<SourceFile> files = load_source_tree(dedup_in);
      DedupResult result = deduplicate(files);
      const std::filesystem::path in_root = dedup_in;
      std::filesystem::create_directories(dedup_out);
      write_staging_tree(result.survivors, dedup_out, &in_root, &result.report);
      if (!dedup_report.empty()) {
        write_text_file(dedup_report, dedup_report_json(result));
      }
      write_text_file(std::filesystem::path(dedup_out + ".report.json"),
                      stage_report_to_json(result.report));
      print_report_summary(result.report);
    });

    // ---- syntax ----
    auto* syntax_cmd = app.add_subcommand("syntax", "Check Verilog syntax per file");
    std::string syn_in, syn_out, syn_backend = "iverilog", syn_tool = "iverilog";
    int syn_jobs = 0, syn_timeout = 30;
    syntax_cmd->add_option("--in", syn_in)->required();
    syntax_cmd->add_option("--out", syn_out)->required();
    syntax_cmd->add_option("--backend", syn_backend, "iverilog | stub");
    syntax_cmd->add_option("--tool-path", syn_tool);
    syntax_cmd->add_option("--jobs", syn_jobs);
    syntax_cmd->add_option("--timeout-secs", syn_timeout);
    syntax_cmd->callback([&] {
      const std::vector<SourceFile> files = load_source_tree(syn_in);
      std::unique_ptr<CompilerBackend> backend;
      if (syn_backend == "stub") {
        backend = std::make_unique<StubCompilerBackend>();
      } else {
        backend = std::make_unique<IcarusBackend>(
            syn_tool, std::vector<std::string>{"-o", "{devnull}", "-Wall", "{file}"},
            std::chrono::seconds(syn_timeout));
      }
      SyntaxStageResult result = run_syntax_stage(files, *backend, {}, syn_jobs);
      const std::filesystem::path in_root = syn_in;
      std::filesystem::create_directories(syn_out);
      write_staging_tree(result.passed, syn_out, &in_root, &result.report);
      write_text_file(std::filesystem::path(syn_out + ".failures.jsonl"),
                      syntax_failure_log(result));
      write_text_file(std::filesystem::path(syn_out + ".report.json"),
                      stage_report_to_json(result.report));
      print_report_summary(result.report);
    });

    // ---- synth ----
    auto* synth_cmd =
        app.add_subcommand("synth", "Check project-level synthesizability");
    std::string sy_in, sy_out, sy_backend = "yosys", sy_tool = "yosys";
    int sy_max_scenarios = 64, sy_probe_budget = 8, sy_jobs = 0, sy_timeout = 120;
    synth_cmd->add_option("--in", sy_in)->required();
    synth_cmd->add_option("--out", sy_out)->required();
    synth_cmd->add_option("--backend", sy_backend, "yosys | stub");
    synth_cmd->add_option("--tool-path", sy_tool);
    synth_cmd->add_option("--max-scenarios", sy_max_scenarios);
    synth_cmd->add_option("--probe-budget", sy_probe_budget);
    synth_cmd->add_option("--jobs", sy_jobs);
    synth_cmd->add_option("--timeout-secs", sy_timeout);
    synth_cmd->callback([&] {
      const std::vector<SourceFile> files = load_source_tree(sy_in);
      const std::vector<ProjectUnit> projects = group_projects(files, sy_in);
      std::unique_ptr<SynthBackend> backend;
      if (sy_backend == "stub") {
        backend = std::make_unique<StubSynthBackend>();
      } else {
        if (!tool_exists(sy_tool)) {
          throw std::runtime_error("synthesizer tool not found: " + sy_tool);
        }
        backend = std::make_unique<YosysBackend>(sy_tool,
                                                 std::chrono::seconds(sy_timeout));
      }
      SynthCheckOptions options;
      options.max_scenarios = static_cast<std::size_t>(sy_max_scenarios);
      options.probe_budget = static_cast<std::size_t>(sy_probe_budget);
      SynthStageResult result = run_synth_stage(projects, *backend, options, sy_jobs);
      const std::filesystem::path in_root = sy_in;
      std::filesystem::create_directories(sy_out);
      write_staging_tree(result.passed, sy_out, &in_root, &result.report);
      std::string log;
      for (const ProjectSynthOutcome& outcome : result.outcomes) {
        log += synth_project_log(outcome);
        log += '\n';
      }
      write_text_file(std::filesystem::path(sy_out + ".projects.jsonl"), log);
      write_text_file(std::filesystem::path(sy_out + ".report.json"),
                      stage_report_to_json(result.report));
      print_report_summary(result.report);
    });

    // ---- extract ----
    auto* extract_cmd =
        app.add_subcommand("extract", "Extract module metadata records");
    std::string ex_in, ex_out, ex_describe = "fallback", ex_endpoint;
    extract_cmd->add_option("--in", ex_in)->required();
    extract_cmd->add_option("--out", ex_out, "Directory for per-module JSON")
        ->required();
    extract_cmd->add_option("--describe", ex_describe, "external | fallback");
    extract_cmd->add_option("--endpoint", ex_endpoint, "Endpoint config file");
    extract_cmd->callback([&] {
      const std::vector<SourceFile> files = load_source_tree(ex_in);
      std::unique_ptr<DescriptionClient> client;
      const EndpointConfig endpoint = endpoint_from_file(ex_endpoint);
      if (ex_describe == "external" && !endpoint.host.empty()) {
        client = std::make_unique<ExternalModelClient>(endpoint);
      } else {
        client = std::make_unique<TemplateFallbackClient>();
      }
      ExtractResult result = extract_records(files, *client);
      write_record_files(result.records, ex_out);
      write_text_file(std::filesystem::path(ex_out + ".report.json"),
                      stage_report_to_json(result.report));
      print_report_summary(result.report);
    });

    // ---- db ----
    auto* db_cmd = app.add_subcommand("db", "Relational store operations");
    db_cmd->require_subcommand(1);
    std::string db_location;
    db_cmd->add_option("--db", db_location, "Store path (FORGE_DB_URL as fallback)");

    auto* db_init = db_cmd->add_subcommand("init", "Create the schema");
    db_init->callback([&] {
      ModuleStore store(resolve_store_location(db_location));
      store.init_schema();
      std::cout << "schema ready\n";
    });

    auto* db_insert = db_cmd->add_subcommand("insert", "Insert records from JSON files");
    std::string db_insert_from;
    db_insert->add_option("--from", db_insert_from, "Directory of record JSON files")
        ->required();
    db_insert->callback([&] {
      ModuleStore store(resolve_store_location(db_location));
      store.init_schema();
      long long inserted = 0, rejected = 0;
      std::vector<std::filesystem::path> paths;
      for (const auto& entry :
           std::filesystem::recursive_directory_iterator(db_insert_from)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          paths.push_back(entry.path());
        }
      }
      std::sort(paths.begin(), paths.end());
      for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        const std::string text((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
        try {
          const auto outcome = store.insert_record(deserialize_record(text));
          if (std::holds_alternative<ModuleStore::Inserted>(outcome)) {
            ++inserted;
          } else {
            ++rejected;
            std::cerr << path.filename().string() << ": "
                      << std::get<ModuleStore::Rejected>(outcome).reason << "\n";
          }
        } catch (const RecordError& e) {
          ++rejected;
          std::cerr << path.filename().string() << ": " << e.detail() << "\n";
        }
      }
      std::cout << "inserted " << inserted << ", rejected " << rejected << "\n";
    });

    auto* db_export = db_cmd->add_subcommand("export", "Export records as JSONL");
    std::string db_export_to;
    db_export->add_option("--to", db_export_to)->required();
    db_export->callback([&] {
      ModuleStore store(resolve_store_location(db_location));
      store.init_schema();
      const auto counts = store.export_jsonl(db_export_to);
      std::cout << "exported " << counts.exported << " records\n";
    });

    auto* db_import = db_cmd->add_subcommand("import", "Import records from JSONL");
    std::string db_import_from;
    db_import->add_option("--from", db_import_from)->required();
    db_import->callback([&] {
      ModuleStore store(resolve_store_location(db_location));
      store.init_schema();
      const auto counts = store.import_jsonl(db_import_from);
      std::cout << "imported " << counts.imported << ", rejected " << counts.rejected
                << "\n";
    });

    auto* db_query = db_cmd->add_subcommand("query", "Query stored modules");
    std::string q_name;
    long long q_token_min = -1, q_token_max = -1, q_ports_min = -1, q_ports_max = -1;
    bool q_has_comments = false, q_no_comments = false;
    db_query->add_option("--name", q_name, "Module name substring");
    db_query->add_option("--token-min", q_token_min);
    db_query->add_option("--token-max", q_token_max);
    db_query->add_option("--ports-min", q_ports_min);
    db_query->add_option("--ports-max", q_ports_max);
    db_query->add_flag("--has-comments", q_has_comments);
    db_query->add_flag("--no-comments", q_no_comments);
    db_query->callback([&] {
      ModuleStore store(resolve_store_location(db_location));
      store.init_schema();
      QueryFilter filter;
      if (!q_name.empty()) filter.name_pattern = q_name;
      if (q_token_min >= 0 || q_token_max >= 0) {
        filter.token_range = {q_token_min >= 0 ? q_token_min : 0,
                              q_token_max >= 0 ? q_token_max
                                               : std::numeric_limits<std::int64_t>::max()};
      }
      if (q_ports_min >= 0 || q_ports_max >= 0) {
        filter.port_count_range = {
            q_ports_min >= 0 ? q_ports_min : 0,
            q_ports_max >= 0 ? q_ports_max
                             : std::numeric_limits<std::int64_t>::max()};
      }
      if (q_has_comments) filter.has_comments = true;
      if (q_no_comments) filter.has_comments = false;
      for (const auto& stored : store.query_modules(filter)) {
        std::cout << stored.id << "\t" << stored.record.module_name << "\t"
                  << stored.record.token_count << " tokens\t"
                  << stored.record.ports.size() << " ports\n";
      }
    });

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics and reports");
    std::string stats_db, stats_out, stats_work, stats_rubric;
    stats_cmd->add_option("--db", stats_db)->required();
    stats_cmd->add_option("--out", stats_out, "Output directory")->required();
    stats_cmd->add_option("--work", stats_work,
                          "Work directory holding stage reports to include");
    stats_cmd->add_option("--rubric", stats_rubric, "Functional class rubric JSON");
    stats_cmd->callback([&] {
      ModuleStore store(resolve_store_location(stats_db));
      store.init_schema();
      std::vector<ModuleRecord> records;
      for (auto& stored : store.query_modules()) records.push_back(stored.record);
      const ClassRubric rubric = stats_rubric.empty()
                                     ? ClassRubric::builtin()
                                     : ClassRubric::load(stats_rubric);
      const CorpusStats stats = compute_stats(records, rubric);

      std::vector<StageReport> stage_reports;
      if (!stats_work.empty()) {
        for (const Stage stage :
             {Stage::Filter, Stage::Dedup, Stage::Syntax, Stage::Synthesis,
              Stage::DbValidation}) {
          const auto path = std::filesystem::path(stats_work) /
                            (stage_directory_name(stage) + ".report.json");
          if (!std::filesystem::exists(path)) continue;
          std::ifstream in(path, std::ios::binary);
          const std::string text((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
          stage_reports.push_back(stage_report_from_json(text));
        }
      }
      const ReportBundle bundle = render_report(&stats, stage_reports);
      std::filesystem::create_directories(stats_out);
      write_text_file(std::filesystem::path(stats_out) / "report.json",
                      bundle.report_json);
      write_text_file(std::filesystem::path(stats_out) / "table1.txt",
                      bundle.table_text);
      for (const auto& [name, csv] : bundle.csvs) {
        write_text_file(std::filesystem::path(stats_out) / name, csv);
      }
      std::cout << "modules: " << stats.module_count << "\n";
    });

    // ---- export-pairs ----
    auto* pairs_cmd =
        app.add_subcommand("export-pairs", "Emit instruction-tuning pairs");
    std::string p_db, p_out, p_preset;
    long long p_budget = -1;
    pairs_cmd->add_option("--db", p_db)->required();
    pairs_cmd->add_option("--budget", p_budget, "Max code tokens per pair");
    pairs_cmd->add_option("--preset", p_preset, "codellama7b | mistral7b");
    pairs_cmd->add_option("--out", p_out)->required();
    pairs_cmd->callback([&] {
      std::optional<std::int64_t> budget;
      if (!p_preset.empty()) {
        budget = preset_budget(p_preset);
        if (!budget) throw std::runtime_error("unknown preset: " + p_preset);
      }
      if (p_budget >= 0) budget = p_budget;
      ModuleStore store(resolve_store_location(p_db));
      store.init_schema();
      const auto counts = export_pairs(store, budget, p_out);
      std::cout << "emitted " << counts.emitted << ", skipped " << counts.skipped
                << "\n";
    });

    // ---- run ----
    auto* run_cmd = app.add_subcommand("run", "Run the staged pipeline end to end");
    std::string run_config, run_work, run_root, run_only, run_report;
    int run_jobs = -1;
    bool run_dry = false;
    run_cmd->add_option("--config", run_config, "Pipeline config file");
    run_cmd->add_option("--work", run_work, "Work directory");
    run_cmd->add_option("--root", run_root, "Corpus root (overrides config)");
    run_cmd->add_option("--only", run_only, "Run a single stage");
    run_cmd->add_option("--jobs", run_jobs);
    run_cmd->add_option("--report", run_report, "Copy of the consolidated report");
    run_cmd->add_flag("--dry-run", run_dry);
    run_cmd->callback([&] {
      PipelineConfig config;
      if (!run_config.empty()) config = pipeline_config_from_file(run_config);
      if (!run_work.empty()) config.work = run_work;
      if (!run_root.empty()) config.root = run_root;
      if (run_jobs >= 0) config.jobs = run_jobs;
      if (run_dry) config.dry_run = true;
      if (!run_only.empty()) {
        const auto stage = stage_from_cli_name(run_only);
        if (!stage) throw std::runtime_error("unknown stage: " + run_only);
        config.stages = {*stage};
      }
      if (config.work.empty()) throw std::runtime_error("--work (or config) required");

      const PipelineResult result = run_pipeline(config);
      for (const std::string& line : result.summary_lines) std::cout << line << "\n";
      if (!result.error.empty()) std::cerr << "error: " << result.error << "\n";
      if (!run_report.empty() && !result.consolidated_json.empty()) {
        write_text_file(run_report, result.consolidated_json);
      }
      if (result.exit_code != 0) {
        throw CLI::RuntimeError(result.exit_code);
      }
      if (result.inserted_modules > 0) {
        std::cout << "modules in store: " << result.inserted_modules << "\n";
      }
    });

    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
