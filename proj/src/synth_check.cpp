#include "forge/synth_check.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <thread>

#include <unistd.h>

#include "json.hpp"

#include "forge/dedup.hpp"  // compute_content_hash for transcript digests
#include "forge/metadata_extract.hpp"
#include "forge/subprocess.hpp"
#include "forge/verilog_lex.hpp"

namespace forge {

// ---------------------------------------------------------------------------
// Module directory and top inference
// ---------------------------------------------------------------------------

ModuleDirectory collect_unique_modules(const ProjectUnit& project) {
  ModuleDirectory dir;
  for (const SourceFile& file : project.files) {
    const std::vector<ModuleRegion> regions = find_modules(file.text());
    if (regions.empty()) {
      dir.parse_failures.push_back({file.path, "ParseFailure: no module declaration"});
      continue;
    }
    for (const ModuleRegion& region : regions) {
      auto& files = dir.declaring_files[region.name];
      if (std::find(files.begin(), files.end(), file.path) == files.end()) {
        files.push_back(file.path);
      }
    }
  }
  for (auto& [name, files] : dir.declaring_files) {
    std::sort(files.begin(), files.end());
  }
  return dir;
}

namespace {

bool name_contains_top(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return lower.find("top") != std::string::npos;
}

}  // namespace

std::vector<TopCandidate> determine_top_module(const ProjectUnit& project,
                                               const ModuleDirectory& modules) {
  // Brute-force instance scan: a module is instantiated when its name
  // appears as a word inside some other module's body.
  std::set<std::string> instantiated;
  std::vector<std::pair<std::string, std::string>> module_bodies;  // name, masked body
  for (const SourceFile& file : project.files) {
    const std::string text = file.text();
    const std::string masked = vlex::mask_non_code(text);
    for (const ModuleRegion& region : find_modules(text)) {
      module_bodies.emplace_back(
          region.name, masked.substr(region.header_end, region.end - region.header_end));
    }
  }
  for (const auto& [name, files] : modules.declaring_files) {
    for (const auto& [other_name, body] : module_bodies) {
      if (other_name == name) continue;
      if (vlex::contains_word(body, name)) {
        instantiated.insert(name);
        break;
      }
    }
  }

  std::vector<TopCandidate> candidates;
  std::set<std::string> listed;
  auto add = [&](const std::string& name, const std::string& file,
                 TopCandidate::Basis basis) {
    if (listed.insert(name).second) candidates.push_back({name, file, basis});
  };

  // Tier 1: "top" in module or file name.
  for (const auto& [name, files] : modules.declaring_files) {
    if (name_contains_top(name)) {
      add(name, files.front(), TopCandidate::Basis::NameHeuristic);
      continue;
    }
    for (const std::string& file : files) {
      if (name_contains_top(std::filesystem::path(file).filename().string())) {
        add(name, file, TopCandidate::Basis::NameHeuristic);
        break;
      }
    }
  }
  // Tier 2: roots of the instantiation graph.
  for (const auto& [name, files] : modules.declaring_files) {
    if (instantiated.count(name) == 0) {
      add(name, files.front(), TopCandidate::Basis::IterativeProbe);
    }
  }
  // Tier 3: everything else.
  for (const auto& [name, files] : modules.declaring_files) {
    add(name, files.front(), TopCandidate::Basis::IterativeProbe);
  }
  return candidates;
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

ScenarioSet enumerate_scenarios(const ModuleDirectory& modules,
                                std::size_t max_scenarios) {
  ScenarioSet result;

  std::vector<std::string> fixed_files;  // single-declaration modules
  struct Collision {
    std::string name;
    std::vector<std::string> files;
  };
  std::vector<Collision> collisions;
  for (const auto& [name, files] : modules.declaring_files) {
    if (files.size() == 1) {
      fixed_files.push_back(files.front());
    } else {
      collisions.push_back({name, files});
    }
  }

  result.total_combinations = 1;
  for (const Collision& c : collisions) {
    result.total_combinations *= c.files.size();
    if (result.total_combinations > max_scenarios) {
      result.exploded = true;
      result.file_sets.clear();
      return result;
    }
  }

  // Mixed-radix enumeration in canonical (name-sorted, file-sorted) order.
  std::vector<std::size_t> choice(collisions.size(), 0);
  while (true) {
    std::set<std::string> files(fixed_files.begin(), fixed_files.end());
    for (std::size_t i = 0; i < collisions.size(); ++i) {
      files.insert(collisions[i].files[choice[i]]);
    }
    // Drop combinations where one selected file declares a collision name
    // chosen from a different file.
    bool consistent = true;
    for (std::size_t i = 0; i < collisions.size() && consistent; ++i) {
      for (const std::string& f : collisions[i].files) {
        if (f != collisions[i].files[choice[i]] && files.count(f) > 0) {
          consistent = false;
          break;
        }
      }
    }
    if (consistent) {
      result.file_sets.emplace_back(files.begin(), files.end());
    }

    std::size_t digit = 0;
    for (; digit < choice.size(); ++digit) {
      if (++choice[digit] < collisions[digit].files.size()) break;
      choice[digit] = 0;
    }
    if (digit == choice.size()) break;
  }
  return result;
}

ScriptVocabulary ScriptVocabulary::yosys() {
  ScriptVocabulary vocab;
  vocab.read_command = [](const std::string& file) {
    return "read_verilog \"" + file + "\"";
  };
  vocab.hierarchy_command = [](const std::string& top) {
    return "hierarchy -check -top " + top;
  };
  vocab.synth_command = [](const std::string& top) { return "synth -top " + top; };
  return vocab;
}

std::string build_synthesis_script(const SynthScenario& scenario,
                                   const ScriptVocabulary& vocabulary) {
  if (scenario.selected_files.empty()) {
    throw std::invalid_argument("scenario has no files");
  }
  std::string script;
  for (const std::string& file : scenario.selected_files) {
    script += vocabulary.read_command(file);
    script += '\n';
  }
  script += vocabulary.hierarchy_command(scenario.top.module_name);
  script += '\n';
  script += vocabulary.synth_command(scenario.top.module_name);
  script += '\n';
  return script;
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

namespace {

const ScriptVocabulary& yosys_vocabulary() {
  static const ScriptVocabulary vocab = ScriptVocabulary::yosys();
  return vocab;
}

std::string strip(std::string_view text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return "";
  const std::size_t last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

}  // namespace

const ScriptVocabulary& SynthBackend::vocabulary() const { return yosys_vocabulary(); }

YosysBackend::YosysBackend(std::string tool_path, std::chrono::seconds timeout)
    : tool_path_(std::move(tool_path)), timeout_(timeout) {}

BackendRun YosysBackend::run_scenario(const SynthScenario& scenario,
                                      const std::vector<const SourceFile*>& files) {
  BackendRun run;
  if (!tool_exists(tool_path_)) {
    run.spawn_failed = true;
    run.spawn_error = "tool not found: " + tool_path_;
    return run;
  }

  static std::atomic<unsigned long> counter{0};
  const auto work = std::filesystem::temp_directory_path() /
                    ("forge-synth-" + std::to_string(::getpid()) + "-" +
                     std::to_string(counter.fetch_add(1)));
  try {
    SynthScenario staged = scenario;
    staged.selected_files.clear();
    for (const std::string& rel : scenario.selected_files) {
      const SourceFile* source = nullptr;
      for (const SourceFile* f : files) {
        if (f->path == rel) {
          source = f;
          break;
        }
      }
      const std::filesystem::path dest = work / rel;
      std::filesystem::create_directories(dest.parent_path());
      std::ofstream out(dest, std::ios::binary);
      if (!out) throw std::runtime_error("cannot stage " + dest.string());
      if (source != nullptr) {
        out.write(source->content.data(),
                  static_cast<std::streamsize>(source->content.size()));
      }
      staged.selected_files.push_back(dest.string());
    }
    const std::string script = build_synthesis_script(staged, vocabulary());
    const CommandResult res = run_command(
        {tool_path_, "-q", "-p", script},
        std::chrono::duration_cast<std::chrono::milliseconds>(timeout_));
    run.spawn_failed = res.spawn_failed;
    run.spawn_error = res.spawn_error;
    run.timed_out = res.timed_out;
    run.exit_code = res.exit_code;
    run.stdout_text = res.out;
    run.stderr_text = res.err;
  } catch (const std::exception& e) {
    run.spawn_failed = true;
    run.spawn_error = e.what();
  }
  std::error_code ec;
  std::filesystem::remove_all(work, ec);
  return run;
}

BackendRun StubSynthBackend::run_scenario(const SynthScenario& scenario,
                                          const std::vector<const SourceFile*>& files) {
  BackendRun run;
  bool fail = false;
  std::string cause;
  if (fail_predicate) {
    fail = fail_predicate(scenario, files);
    cause = scenario.top.module_name;
  } else {
    for (const SourceFile* f : files) {
      if (f->content.find("#SYNTH_FAIL") != std::string::npos) {
        fail = true;
        cause = f->path;
        break;
      }
    }
  }
  if (fail) {
    run.exit_code = 1;
    run.stderr_text = "ERROR: stub synthesis failed (" + cause + ")";
  } else {
    run.exit_code = 0;
    run.stdout_text = "stub synthesis pass: top " + scenario.top.module_name;
  }
  return run;
}

// ---------------------------------------------------------------------------
// Project check
// ---------------------------------------------------------------------------

bool classify_synth_output(std::string_view output,
                           const std::string& failure_pattern) {
  const std::regex re(failure_pattern);
  return std::regex_search(output.begin(), output.end(), re);
}

ProjectSynthOutcome run_synth_check(const ProjectUnit& project, SynthBackend& backend,
                                    const SynthCheckOptions& options) {
  ProjectSynthOutcome outcome;
  outcome.project_id = project.project_id;

  const ModuleDirectory modules = collect_unique_modules(project);
  outcome.parse_failures = modules.parse_failures;
  if (modules.declaring_files.empty()) {
    outcome.reject_reason = "no module declarations in project";
    return outcome;
  }

  const ScenarioSet scenarios = enumerate_scenarios(modules, options.max_scenarios);
  if (scenarios.exploded) {
    outcome.reject_reason = "ScenarioExplosion: " +
                            std::to_string(scenarios.total_combinations) +
                            " combinations exceed cap " +
                            std::to_string(options.max_scenarios);
    return outcome;
  }

  const std::vector<TopCandidate> tops = determine_top_module(project, modules);

  for (const std::vector<std::string>& file_set : scenarios.file_sets) {
    std::vector<const SourceFile*> selected;
    for (const SourceFile& f : project.files) {
      if (std::find(file_set.begin(), file_set.end(), f.path) != file_set.end()) {
        selected.push_back(&f);
      }
    }

    std::size_t probes = 0;
    for (const TopCandidate& top : tops) {
      if (probes++ >= options.probe_budget) break;
      SynthScenario scenario{file_set, top};

      const BackendRun run = backend.run_scenario(scenario, selected);
      if (run.spawn_failed) {
        outcome.reject_reason = "ToolFailure: " + run.spawn_error;
        return outcome;
      }

      SynthAttempt attempt;
      attempt.scenario = scenario;
      attempt.script = build_synthesis_script(scenario, backend.vocabulary());
      if (run.timed_out) {
        attempt.output = "TIMEOUT";
        attempt.failure = true;
      } else {
        attempt.output = strip(run.stdout_text) + "\n" + strip(run.stderr_text);
        attempt.failure = classify_synth_output(attempt.output, options.failure_pattern);
      }
      outcome.attempts.push_back(attempt);

      if (!attempt.failure) {
        outcome.passed = true;
        outcome.retained_files = file_set;
        for (const SourceFile& f : project.files) {
          if (std::find(file_set.begin(), file_set.end(), f.path) == file_set.end()) {
            bool parse_failed = false;
            for (const Rejection& r : outcome.parse_failures) {
              parse_failed = parse_failed || r.path == f.path;
            }
            if (!parse_failed) outcome.flagged_files.push_back(f.path);
          }
        }
        return outcome;
      }
    }
  }

  outcome.reject_reason = outcome.attempts.empty()
                              ? "no synthesizable top found"
                              : "no passing scenario (" +
                                    std::to_string(outcome.attempts.size()) +
                                    " attempts)";
  return outcome;
}

std::string synth_project_log(const ProjectSynthOutcome& outcome) {
  nlohmann::ordered_json j;
  j["project"] = outcome.project_id;
  j["passed"] = outcome.passed;
  j["scenarios_tried"] = outcome.attempts.size();
  nlohmann::ordered_json attempts = nlohmann::ordered_json::array();
  for (const SynthAttempt& a : outcome.attempts) {
    nlohmann::ordered_json e;
    e["files"] = a.scenario.selected_files;
    e["top"] = a.scenario.top.module_name;
    e["verdict"] = a.failure ? "fail" : "pass";
    e["transcript_md5"] = compute_content_hash(a.output);
    attempts.push_back(e);
  }
  j["attempts"] = attempts;
  if (!outcome.passed) j["reject_reason"] = outcome.reject_reason;
  if (!outcome.flagged_files.empty()) j["flagged_files"] = outcome.flagged_files;
  return j.dump();
}

SynthStageResult run_synth_stage(const std::vector<ProjectUnit>& projects,
                                 SynthBackend& backend,
                                 const SynthCheckOptions& options, int jobs) {
  SynthStageResult result;
  result.report.stage = Stage::Synthesis;

  std::vector<ProjectSynthOutcome> outcomes(projects.size());
  const int worker_count =
      std::max(1, jobs > 0 ? jobs
                           : std::min<int>(static_cast<int>(projects.size()),
                                           std::thread::hardware_concurrency()));
  if (worker_count <= 1 || projects.size() <= 1) {
    for (std::size_t i = 0; i < projects.size(); ++i) {
      outcomes[i] = run_synth_check(projects[i], backend, options);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < worker_count; ++w) {
      workers.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= projects.size()) return;
          outcomes[i] = run_synth_check(projects[i], backend, options);
        }
      });
    }
    for (std::thread& t : workers) t.join();
  }

  // Canonical merge by project id.
  std::vector<std::size_t> order(projects.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return projects[a].project_id < projects[b].project_id;
  });

  for (const std::size_t i : order) {
    const ProjectUnit& project = projects[i];
    const ProjectSynthOutcome& outcome = outcomes[i];
    result.outcomes.push_back(outcome);
    for (const SourceFile& file : project.files) {
      ++result.report.input_count;
      result.report.input_bytes += static_cast<std::int64_t>(file.content.size());

      bool parse_failed = false;
      for (const Rejection& r : outcome.parse_failures) {
        if (r.path == file.path) {
          result.report.rejections.push_back(r);
          parse_failed = true;
          break;
        }
      }
      if (parse_failed) continue;

      const bool retained =
          outcome.passed &&
          std::find(outcome.retained_files.begin(), outcome.retained_files.end(),
                    file.path) != outcome.retained_files.end();
      if (retained) {
        result.passed.push_back(file);
        ++result.report.output_count;
        result.report.output_bytes += static_cast<std::int64_t>(file.content.size());
      } else if (outcome.passed) {
        result.report.rejections.push_back(
            {file.path, "not part of the passing scenario"});
      } else {
        result.report.rejections.push_back({file.path, outcome.reject_reason});
      }
    }
  }
  std::sort(result.passed.begin(), result.passed.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
  return result;
}

}  // namespace forge
