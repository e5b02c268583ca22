#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "forge/corpus_model.hpp"
#include "forge/syntax_check.hpp"  // BackendRun

namespace forge {

// ---------------------------------------------------------------------------
// Module directory and top inference
// ---------------------------------------------------------------------------

struct ModuleDirectory {
  // Every declared module name in the project -> declaring files (sorted);
  // multi-declaration names map to more than one file.
  std::map<std::string, std::vector<std::string>> declaring_files;
  std::vector<Rejection> parse_failures;  // files with no module declaration
};

ModuleDirectory collect_unique_modules(const ProjectUnit& project);

struct TopCandidate {
  enum class Basis { NameHeuristic, IterativeProbe };

  std::string module_name;
  std::string file;  // one declaring file
  Basis basis = Basis::IterativeProbe;

  bool operator==(const TopCandidate&) const = default;
};

// Probe order for iterative synthesis attempts: "top"-named candidates
// first, then modules never instantiated by another module in the project,
// then the rest.
std::vector<TopCandidate> determine_top_module(const ProjectUnit& project,
                                               const ModuleDirectory& modules);

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

struct SynthScenario {
  std::vector<std::string> selected_files;  // sorted, one per module name
  TopCandidate top;
};

struct ScenarioSet {
  std::vector<std::vector<std::string>> file_sets;  // deterministic order
  std::size_t total_combinations = 0;
  bool exploded = false;  // total exceeded the cap; no sets emitted
};

// Cartesian expansion over colliding module names; combinations where two
// selected files declare the same module are dropped.
ScenarioSet enumerate_scenarios(const ModuleDirectory& modules,
                                std::size_t max_scenarios);

// Backend command vocabulary; Alg-style script: one read per file, then
// hierarchy check, then generic synthesis.
struct ScriptVocabulary {
  std::function<std::string(const std::string&)> read_command;
  std::function<std::string(const std::string&)> hierarchy_command;
  std::function<std::string(const std::string&)> synth_command;

  static ScriptVocabulary yosys();
};

std::string build_synthesis_script(const SynthScenario& scenario,
                                   const ScriptVocabulary& vocabulary =
                                       ScriptVocabulary::yosys());

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

class SynthBackend {
 public:
  virtual ~SynthBackend() = default;
  virtual BackendRun run_scenario(const SynthScenario& scenario,
                                  const std::vector<const SourceFile*>& files) = 0;
  virtual const ScriptVocabulary& vocabulary() const;
};

// Materializes the scenario's files into a temp tree and runs
// `<tool> -q -p <script>` against it.
class YosysBackend final : public SynthBackend {
 public:
  explicit YosysBackend(std::string tool_path = "yosys",
                        std::chrono::seconds timeout = std::chrono::seconds(120));
  BackendRun run_scenario(const SynthScenario& scenario,
                          const std::vector<const SourceFile*>& files) override;

 private:
  std::string tool_path_;
  std::chrono::seconds timeout_;
};

// Hermetic backend: a scenario fails when any selected file carries the
// //#SYNTH_FAIL marker (or the optional predicate says so), emitting an
// ERROR-prefixed transcript the classifier recognizes.
class StubSynthBackend final : public SynthBackend {
 public:
  BackendRun run_scenario(const SynthScenario& scenario,
                          const std::vector<const SourceFile*>& files) override;

  // Optional override; returns true to fail the scenario.
  std::function<bool(const SynthScenario&, const std::vector<const SourceFile*>&)>
      fail_predicate;
};

// ---------------------------------------------------------------------------
// Project check
// ---------------------------------------------------------------------------

// True iff the transcript matches the non-tolerable error pattern.
// Pure in (output, pattern): replaying a captured transcript gives the
// same flag.
bool classify_synth_output(std::string_view output, const std::string& failure_pattern);

struct SynthCheckOptions {
  std::size_t max_scenarios = 64;
  std::size_t probe_budget = 8;  // top candidates tried per scenario
  // Tolerable warnings pass; ERROR-prefixed lines and unresolved-hierarchy
  // messages do not. Shipped as config because it is tool-dependent.
  std::string failure_pattern =
      R"((^|\n)ERROR|is not part of the design|unresolved hierarchy|syntax error)";
};

struct SynthAttempt {
  SynthScenario scenario;
  std::string script;  // as built over the project-relative paths
  bool failure = false;
  std::string output;  // strip(stdout) + "\n" + strip(stderr)
};

struct ProjectSynthOutcome {
  std::string project_id;
  bool passed = false;
  std::vector<std::string> retained_files;  // passing scenario participants
  std::vector<std::string> flagged_files;   // project files left out of it
  std::vector<SynthAttempt> attempts;
  std::string reject_reason;  // when !passed
  std::vector<Rejection> parse_failures;
};

// A project passes when any scenario passes with any top candidate;
// scenarios run sequentially in probe order so the first pass exits early.
ProjectSynthOutcome run_synth_check(const ProjectUnit& project, SynthBackend& backend,
                                    const SynthCheckOptions& options = {});

// Per-project JSON log: scenarios tried, verdicts, transcript digests.
std::string synth_project_log(const ProjectSynthOutcome& outcome);

struct SynthStageResult {
  std::vector<SourceFile> passed;  // canonical path order
  StageReport report;
  std::vector<ProjectSynthOutcome> outcomes;
};

SynthStageResult run_synth_stage(const std::vector<ProjectUnit>& projects,
                                 SynthBackend& backend,
                                 const SynthCheckOptions& options = {}, int jobs = 0);

}  // namespace forge
