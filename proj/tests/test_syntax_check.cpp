#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"

#include "forge/syntax_check.hpp"

using namespace forge;

namespace {

SourceFile make_file(std::string path, std::string content) {
  SourceFile file;
  file.path = std::move(path);
  file.content = std::move(content);
  return file;
}

}  // namespace

TEST_CASE("clean exit is a pass") {
  const SyntaxOutcome outcome = classify_diagnostics(0, "");
  CHECK(outcome.verdict == SyntaxVerdict::Pass);
  CHECK(outcome.messages.empty());
}

TEST_CASE("exit zero with stderr passes with warnings") {
  const SyntaxOutcome outcome =
      classify_diagnostics(0, "a.v:3: warning: implicit wire\n");
  CHECK(outcome.verdict == SyntaxVerdict::PassWithWarnings);
  REQUIRE(outcome.messages.size() == 1);
}

TEST_CASE("syntax error lines fail") {
  const SyntaxOutcome outcome =
      classify_diagnostics(2, "a.v:4: syntax error\na.v:4: error: malformed statement\n");
  CHECK(outcome.verdict == SyntaxVerdict::SyntaxError);
  CHECK(outcome.messages.size() == 2);
}

TEST_CASE("elaboration-only diagnostics pass with issues") {
  const SyntaxOutcome outcome =
      classify_diagnostics(1, "a.v:2: error: Unknown module type: child\n");
  CHECK(outcome.verdict == SyntaxVerdict::PassWithElaborationIssues);
  REQUIRE(outcome.messages.size() == 1);
}

TEST_CASE("macro warnings on a failing run are elaboration-class") {
  const SyntaxOutcome outcome = classify_diagnostics(
      1, "a.v:1: warning: macro WIDTH undefined (and assumed null)\n");
  CHECK(outcome.verdict == SyntaxVerdict::PassWithElaborationIssues);
}

TEST_CASE("mixed syntax and elaboration lines follow the elaboration branch") {
  // The checker's control flow tests elaboration emptiness first, so a run
  // with both kinds of lines lands in the elaboration branch.
  const SyntaxOutcome outcome = classify_diagnostics(
      2, "a.v:4: syntax error\na.v:9: error: Unable to bind wire `w'\n");
  CHECK(outcome.verdict == SyntaxVerdict::PassWithElaborationIssues);
  REQUIRE(outcome.messages.size() == 1);
  CHECK(outcome.messages[0].find("Unable to bind") != std::string::npos);
}

TEST_CASE("unclassifiable nonzero exits fail with Unknown error") {
  const SyntaxOutcome empty = classify_diagnostics(3, "");
  CHECK(empty.verdict == SyntaxVerdict::SyntaxError);
  REQUIRE(empty.messages.size() == 1);
  CHECK(empty.messages[0] == "Unknown error");

  const SyntaxOutcome odd = classify_diagnostics(3, "something odd happened\n");
  CHECK(odd.verdict == SyntaxVerdict::SyntaxError);
}

TEST_CASE("classification is a pure function of exit code and stderr") {
  const std::string transcript =
      "x.v:1: syntax error\nx.v:2: error: malformed statement\n";
  const SyntaxOutcome a = classify_diagnostics(2, transcript);
  const SyntaxOutcome b = classify_diagnostics(2, transcript);
  CHECK(a == b);
}

TEST_CASE("stub backend markers drive the stage") {
  StubCompilerBackend backend;
  const std::vector<SourceFile> files = {
      make_file("p/clean.v", "module a; endmodule"),
      make_file("p/warn.v", "module b; endmodule //#WARN"),
      make_file("p/elab.v", "module c; endmodule //#ELAB_ISSUE"),
      make_file("p/macro.v", "module d; endmodule //#MACRO_WARN"),
      make_file("p/bad.v", "module e; endmodule //#SYNTAX_FAIL"),
      make_file("p/tool.v", "module f; endmodule //#TOOL_FAIL"),
  };
  const SyntaxStageResult result = run_syntax_stage(files, backend, {}, 2);

  CHECK(result.report.input_count == 6);
  CHECK(result.report.output_count == 4);  // clean, warn, elab, macro
  REQUIRE(result.report.rejections.size() == 2);

  // Outcomes are merged in canonical path order.
  std::vector<std::string> order;
  for (const auto& [path, outcome] : result.outcomes) order.push_back(path);
  CHECK(std::is_sorted(order.begin(), order.end()));

  for (const auto& [path, outcome] : result.outcomes) {
    if (path == "p/clean.v") CHECK(outcome.verdict == SyntaxVerdict::Pass);
    if (path == "p/warn.v") CHECK(outcome.verdict == SyntaxVerdict::PassWithWarnings);
    if (path == "p/elab.v")
      CHECK(outcome.verdict == SyntaxVerdict::PassWithElaborationIssues);
    if (path == "p/macro.v")
      CHECK(outcome.verdict == SyntaxVerdict::PassWithElaborationIssues);
    if (path == "p/bad.v") CHECK(outcome.verdict == SyntaxVerdict::SyntaxError);
    if (path == "p/tool.v") CHECK(outcome.verdict == SyntaxVerdict::ToolFailure);
  }
}

TEST_CASE("per-file verdicts are independent of the rest of the input") {
  StubCompilerBackend backend;
  const SourceFile bad = make_file("p/bad.v", "//#SYNTAX_FAIL");
  const SourceFile good = make_file("p/good.v", "module g; endmodule");

  const auto both = run_syntax_stage({bad, good}, backend, {}, 1);
  const auto alone = run_syntax_stage({good}, backend, {}, 1);
  CHECK(both.outcomes.back().second == alone.outcomes.front().second);
}

TEST_CASE("scripted stub entries override content markers") {
  StubCompilerBackend backend;
  BackendRun scripted;
  scripted.exit_code = 2;
  scripted.stderr_text = "custom.v:1: syntax error\n";
  backend.scripted["p/clean.v"] = scripted;
  const SyntaxOutcome outcome =
      check_syntax(make_file("p/clean.v", "module a; endmodule"), backend);
  CHECK(outcome.verdict == SyntaxVerdict::SyntaxError);
}

TEST_CASE("failure log is one JSON object per rejected file") {
  StubCompilerBackend backend;
  const std::vector<SourceFile> files = {
      make_file("p/bad.v", "//#SYNTAX_FAIL"),
      make_file("p/good.v", "module g; endmodule"),
  };
  const SyntaxStageResult result = run_syntax_stage(files, backend);
  const std::string log = syntax_failure_log(result);
  REQUIRE_FALSE(log.empty());
  const auto j = nlohmann::json::parse(log.substr(0, log.find('\n')));
  CHECK(j["path"] == "p/bad.v");
  CHECK(j["verdict"] == "SyntaxError");
  CHECK(j["messages"].is_array());
}

TEST_CASE("missing external tool yields ToolFailure, not a crash") {
  IcarusBackend backend("definitely-not-a-real-tool-name-zzz");
  const SyntaxOutcome outcome =
      check_syntax(make_file("x.v", "module x; endmodule"), backend);
  CHECK(outcome.verdict == SyntaxVerdict::ToolFailure);
}
