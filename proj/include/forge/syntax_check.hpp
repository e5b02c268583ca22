#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "forge/corpus_model.hpp"

namespace forge {

enum class SyntaxVerdict {
  Pass,
  PassWithWarnings,
  PassWithElaborationIssues,
  SyntaxError,
  ToolFailure,
};

std::string_view syntax_verdict_to_string(SyntaxVerdict verdict);

struct SyntaxOutcome {
  SyntaxVerdict verdict = SyntaxVerdict::Pass;
  std::vector<std::string> messages;

  bool retained() const {
    return verdict == SyntaxVerdict::Pass ||
           verdict == SyntaxVerdict::PassWithWarnings ||
           verdict == SyntaxVerdict::PassWithElaborationIssues;
  }
  bool operator==(const SyntaxOutcome&) const = default;
};

// Diagnostic classification patterns. Tool-version-dependent, so shipped as
// configuration; the defaults are written for Icarus Verilog output. Lines
// containing "warning: macro" are always elaboration-class, which mirrors
// the checker this stage reproduces.
struct TriageRules {
  std::string syntax_error_pattern =
      R"(syntax error|parse error|malformed statement|Errors in pin assignments|I give up)";
  std::string elaboration_pattern =
      R"(Unable to bind|Unknown module type|is not defined|port .* is not a port|could not find|unresolved)";
};

// Pure function of (exit code, stderr text): replaying captured diagnostics
// yields identical verdicts.
//   exit 0, empty stderr          -> Pass
//   exit 0, non-empty stderr      -> PassWithWarnings
//   nonzero, elaboration lines    -> PassWithElaborationIssues
//   nonzero, syntax match only    -> SyntaxError
//   nonzero, nothing classified   -> SyntaxError ("Unknown error")
SyntaxOutcome classify_diagnostics(int exit_code, std::string_view stderr_text,
                                   const TriageRules& rules = {});

// Raw result of one backend invocation, before classification.
struct BackendRun {
  bool spawn_failed = false;
  std::string spawn_error;
  bool timed_out = false;
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
};

// Syntax-check backends must be usable from concurrent worker threads.
class CompilerBackend {
 public:
  virtual ~CompilerBackend() = default;
  virtual BackendRun run_check(const SourceFile& file) = 0;
};

// Invokes an external compiler on a materialized copy of the file. The
// argument template must reference {file} and discard object output via
// {devnull} (no binaries are wanted, only diagnostics).
class IcarusBackend final : public CompilerBackend {
 public:
  explicit IcarusBackend(std::string tool_path = "iverilog",
                         std::vector<std::string> arg_template = {"-o", "{devnull}",
                                                                  "-Wall", "{file}"},
                         std::chrono::seconds timeout = std::chrono::seconds(30));
  BackendRun run_check(const SourceFile& file) override;

 private:
  std::string tool_path_;
  std::vector<std::string> arg_template_;
  std::chrono::seconds timeout_;
};

// Deterministic, hermetic backend for tests and CI. Behaviour is scripted
// either per path or by content markers:
//   //#SYNTAX_FAIL  -> nonzero exit with a syntax-error diagnostic
//   //#ELAB_ISSUE   -> nonzero exit with an elaboration diagnostic
//   //#MACRO_WARN   -> nonzero exit with a "warning: macro" line
//   //#TOOL_FAIL    -> spawn failure
//   //#WARN         -> exit 0 with a warning on stderr
class StubCompilerBackend final : public CompilerBackend {
 public:
  BackendRun run_check(const SourceFile& file) override;

  // Explicit per-path script; takes precedence over content markers.
  std::map<std::string, BackendRun> scripted;
};

// Runs the backend and classifies. Spawn failures and timeouts become
// ToolFailure instead of aborting the stage.
SyntaxOutcome check_syntax(const SourceFile& file, CompilerBackend& backend,
                           const TriageRules& rules = {});

struct SyntaxStageResult {
  std::vector<SourceFile> passed;  // canonical path order
  StageReport report;
  std::vector<std::pair<std::string, SyntaxOutcome>> outcomes;  // per path
};

// Per-file checks on a bounded worker pool; elaboration issues are deferred
// to the synthesis stage, so those files are retained.
SyntaxStageResult run_syntax_stage(const std::vector<SourceFile>& files,
                                   CompilerBackend& backend,
                                   const TriageRules& rules = {}, int jobs = 0);

// JSON lines {path, verdict, messages} for every non-retained file.
std::string syntax_failure_log(const SyntaxStageResult& result);

}  // namespace forge
