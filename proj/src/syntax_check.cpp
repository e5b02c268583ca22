#include "forge/syntax_check.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <regex>
#include <thread>

#include <unistd.h>

#include "json.hpp"

#include "forge/subprocess.hpp"

namespace forge {

std::string_view syntax_verdict_to_string(SyntaxVerdict verdict) {
  switch (verdict) {
    case SyntaxVerdict::Pass: return "Pass";
    case SyntaxVerdict::PassWithWarnings: return "PassWithWarnings";
    case SyntaxVerdict::PassWithElaborationIssues: return "PassWithElaborationIssues";
    case SyntaxVerdict::SyntaxError: return "SyntaxError";
    case SyntaxVerdict::ToolFailure: return "ToolFailure";
  }
  return "Pass";
}

namespace {

std::string strip(std::string_view text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return "";
  const std::size_t last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line = strip(text.substr(start, nl - start));
    if (!line.empty()) lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

}  // namespace

SyntaxOutcome classify_diagnostics(int exit_code, std::string_view stderr_text,
                                   const TriageRules& rules) {
  const std::string stripped = strip(stderr_text);
  if (exit_code == 0) {
    if (stripped.empty()) return {SyntaxVerdict::Pass, {}};
    return {SyntaxVerdict::PassWithWarnings, split_lines(stripped)};
  }

  const std::regex syntax_re(rules.syntax_error_pattern);
  const std::regex elab_re(rules.elaboration_pattern);
  bool has_syntax_error = false;
  std::vector<std::string> elaboration_errors;
  const std::vector<std::string> lines = split_lines(stripped);
  for (const std::string& line : lines) {
    if (std::regex_search(line, syntax_re)) {
      has_syntax_error = true;
    } else if (std::regex_search(line, elab_re) ||
               line.find("warning: macro") != std::string::npos) {
      elaboration_errors.push_back(line);
    }
  }

  if (has_syntax_error && elaboration_errors.empty()) {
    return {SyntaxVerdict::SyntaxError,
            lines.empty() ? std::vector<std::string>{"Unknown syntax error"} : lines};
  }
  if (!elaboration_errors.empty()) {
    return {SyntaxVerdict::PassWithElaborationIssues, elaboration_errors};
  }
  return {SyntaxVerdict::SyntaxError,
          lines.empty() ? std::vector<std::string>{"Unknown error"} : lines};
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

IcarusBackend::IcarusBackend(std::string tool_path,
                             std::vector<std::string> arg_template,
                             std::chrono::seconds timeout)
    : tool_path_(std::move(tool_path)),
      arg_template_(std::move(arg_template)),
      timeout_(timeout) {}

namespace {

// Temp file holding the candidate's bytes; compilers want a real path.
class MaterializedFile {
 public:
  explicit MaterializedFile(const SourceFile& file) {
    static std::atomic<unsigned long> counter{0};
    const auto id = counter.fetch_add(1);
    std::filesystem::path name =
        "forge-" + std::to_string(::getpid()) + "-" + std::to_string(id) + "-" +
        std::filesystem::path(file.path).filename().string();
    path_ = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot create temp file " + path_.string());
    out.write(file.content.data(), static_cast<std::streamsize>(file.content.size()));
  }
  ~MaterializedFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  MaterializedFile(const MaterializedFile&) = delete;
  MaterializedFile& operator=(const MaterializedFile&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string substitute(std::string arg, const std::string& file_path) {
  auto replace_all = [](std::string& text, std::string_view key, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
      text.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace_all(arg, "{file}", file_path);
  replace_all(arg, "{devnull}", "/dev/null");
  return arg;
}

}  // namespace

BackendRun IcarusBackend::run_check(const SourceFile& file) {
  BackendRun run;
  if (!tool_exists(tool_path_)) {
    run.spawn_failed = true;
    run.spawn_error = "tool not found: " + tool_path_;
    return run;
  }
  try {
    MaterializedFile temp(file);
    std::vector<std::string> argv{tool_path_};
    for (const std::string& arg : arg_template_) {
      argv.push_back(substitute(arg, temp.path().string()));
    }
    const CommandResult res = run_command(
        argv, std::chrono::duration_cast<std::chrono::milliseconds>(timeout_));
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
  return run;
}

BackendRun StubCompilerBackend::run_check(const SourceFile& file) {
  if (const auto it = scripted.find(file.path); it != scripted.end()) {
    return it->second;
  }
  const std::string& text = file.content;
  BackendRun run;
  if (text.find("#TOOL_FAIL") != std::string::npos) {
    run.spawn_failed = true;
    run.spawn_error = "stub: tool unavailable";
    return run;
  }
  if (text.find("#SYNTAX_FAIL") != std::string::npos) {
    run.exit_code = 2;
    run.stderr_text = file.path + ":3: syntax error\n" + file.path +
                      ":3: error: malformed statement\n";
    return run;
  }
  if (text.find("#ELAB_ISSUE") != std::string::npos) {
    run.exit_code = 2;
    run.stderr_text = file.path + ":5: error: Unknown module type: missing_sub\n";
    return run;
  }
  if (text.find("#MACRO_WARN") != std::string::npos) {
    run.exit_code = 1;
    run.stderr_text =
        file.path + ":1: warning: macro STUB_WIDTH undefined (and assumed null)\n";
    return run;
  }
  if (text.find("#WARN") != std::string::npos) {
    run.exit_code = 0;
    run.stderr_text = file.path + ":2: warning: implicit definition of wire 'w'\n";
    return run;
  }
  return run;  // clean pass
}

SyntaxOutcome check_syntax(const SourceFile& file, CompilerBackend& backend,
                           const TriageRules& rules) {
  const BackendRun run = backend.run_check(file);
  if (run.spawn_failed) {
    return {SyntaxVerdict::ToolFailure, {run.spawn_error}};
  }
  if (run.timed_out) {
    return {SyntaxVerdict::ToolFailure, {"timeout"}};
  }
  return classify_diagnostics(run.exit_code, run.stderr_text, rules);
}

SyntaxStageResult run_syntax_stage(const std::vector<SourceFile>& files,
                                   CompilerBackend& backend, const TriageRules& rules,
                                   int jobs) {
  SyntaxStageResult result;
  result.report.stage = Stage::Syntax;
  result.report.input_count = static_cast<std::int64_t>(files.size());
  for (const SourceFile& f : files) {
    result.report.input_bytes += static_cast<std::int64_t>(f.content.size());
  }

  std::vector<SyntaxOutcome> outcomes(files.size());
  const int worker_count =
      std::max(1, jobs > 0 ? jobs
                           : std::min<int>(static_cast<int>(files.size()),
                                           std::thread::hardware_concurrency()));
  if (worker_count == 1 || files.size() <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      outcomes[i] = check_syntax(files[i], backend, rules);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < worker_count; ++w) {
      workers.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= files.size()) return;
          outcomes[i] = check_syntax(files[i], backend, rules);
        }
      });
    }
    for (std::thread& t : workers) t.join();
  }

  // Merge in canonical path order regardless of execution order.
  std::vector<std::size_t> order(files.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return files[a].path < files[b].path;
  });

  for (const std::size_t i : order) {
    const SourceFile& file = files[i];
    const SyntaxOutcome& outcome = outcomes[i];
    result.outcomes.emplace_back(file.path, outcome);
    if (outcome.retained()) {
      result.passed.push_back(file);
      ++result.report.output_count;
      result.report.output_bytes += static_cast<std::int64_t>(file.content.size());
    } else {
      std::string reason = std::string(syntax_verdict_to_string(outcome.verdict));
      if (!outcome.messages.empty()) reason += ": " + outcome.messages.front();
      result.report.rejections.push_back({file.path, reason});
    }
  }
  return result;
}

std::string syntax_failure_log(const SyntaxStageResult& result) {
  std::string log;
  for (const auto& [path, outcome] : result.outcomes) {
    if (outcome.retained()) continue;
    nlohmann::ordered_json j;
    j["path"] = path;
    j["verdict"] = std::string(syntax_verdict_to_string(outcome.verdict));
    j["messages"] = outcome.messages;
    log += j.dump();
    log += '\n';
  }
  return log;
}

}  // namespace forge
