#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "forge/corpus_model.hpp"

namespace forge {

// Exclusion rules applied before any tool-based validation. Path rules are
// case-insensitive; content rules are case-sensitive (Verilog system tasks
// are case-sensitive).
struct FilterConfig {
  std::vector<std::string> path_excludes{"sim", "simulate", "waveform", "_test"};
  std::vector<std::string> suffix_excludes{"_netlist.v", "_gate.v", "_mapped.v",
                                           "_synth.v"};
  std::vector<std::string> testbench_markers{"tb", "TB"};
  std::vector<std::string> content_excludes{"$display", "initial", "waveform.vcd",
                                            "dumpfile"};

  bool operator==(const FilterConfig&) const = default;
};

struct FilterDecision {
  bool keep = true;
  std::string reason;      // populated on reject
  std::string annotation;  // non-fatal flag, e.g. bare `initial` heuristic
};

// Keyword occurrence check used for path rules: the marker must be bounded
// by non-alphanumeric characters on both sides, except where the marker's
// own edge character already is one (so "_test" matches inside
// "fifo_test.v" while "tb" does not match inside "heartbeat").
bool matches_path_keyword(std::string_view segment, std::string_view keyword);

// Applies the rules in order: (a) filename suffix, (b) path segment or
// filename keyword, (c) content marker outside comments. A bare `initial`
// with no other marker only annotates the decision; the synthesis stage is
// the final arbiter for it.
FilterDecision filter_file(const SourceFile& file, const FilterConfig& config);

struct ScanResult {
  std::vector<ProjectUnit> projects;  // one per immediate child directory
  StageReport report;
};

// Walks `root` treating each immediate child directory as one project and
// keeps the `.v` files that survive filter_file. Unreadable entries become
// rejections, not errors. Output order is canonical (lexicographic by path)
// regardless of directory iteration order.
ScanResult scan_projects(const std::filesystem::path& root,
                         const FilterConfig& config, const Origin& origin = {});

// Reads a filter config override document (TOML-style, see config.hpp).
FilterConfig filter_config_from_file(const std::filesystem::path& path);

}  // namespace forge
