#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "forge/corpus_model.hpp"
#include "forge/persistence.hpp"

namespace forge {

// Fixed system sentence every prompt starts with.
inline constexpr std::string_view kSystemPrompt =
    "You are a highly experienced RTL code designer skilled at designing "
    "concise, syntactically correct, and synthesizable Verilog code that "
    "functions.";

// Named context-window presets.
inline constexpr std::int64_t kCodeLlama7bBudget = 4096;
inline constexpr std::int64_t kMistral7bBudget = 8192;
std::optional<std::int64_t> preset_budget(std::string_view name);

struct InstructionPair {
  std::string prompt;
  std::string response;  // the verilog_code verbatim
  std::int64_t source_id = 0;
  std::int64_t token_count = 0;  // code tokens; prompts cost nothing here

  bool operator==(const InstructionPair&) const = default;
};

// One comma-separated declaration per port: `<direction> [W-1:0] <name>` for
// widths above one (the range reconstructed from the stored width), scalar
// ports as `<direction> <name>`; "(no ports)" for the portless exemptions.
std::string render_port_line(const std::vector<PortSpec>& ports);

// prompt = system sentence, generate line, port line, description, separated
// by blank lines; response = the stored code untouched. Deterministic.
InstructionPair format_pair(const ModuleRecord& record, std::int64_t source_id);

struct PairExportCounts {
  std::int64_t emitted = 0;
  std::int64_t skipped = 0;
};

// JSONL of pairs whose code token count fits the budget (absent budget =
// everything), ordered by source id. Keys: prompt, response, source_id,
// token_count.
PairExportCounts export_pairs(const ModuleStore& store,
                              std::optional<std::int64_t> budget,
                              const std::filesystem::path& out_path);

std::string pair_to_json(const InstructionPair& pair);

}  // namespace forge
