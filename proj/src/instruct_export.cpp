#include "forge/instruct_export.hpp"

#include <fstream>

#include "json.hpp"

namespace forge {

std::optional<std::int64_t> preset_budget(std::string_view name) {
  if (name == "codellama7b") return kCodeLlama7bBudget;
  if (name == "mistral7b") return kMistral7bBudget;
  return std::nullopt;
}

std::string render_port_line(const std::vector<PortSpec>& ports) {
  if (ports.empty()) return "(no ports)";
  std::string line;
  for (std::size_t i = 0; i < ports.size(); ++i) {
    const PortSpec& port = ports[i];
    if (i > 0) line += ", ";
    line += port_direction_to_string(port.direction);
    if (port.bit_width.is_resolved()) {
      if (port.bit_width.width() > 1) {
        line += " [" + std::to_string(port.bit_width.width() - 1) + ":0]";
      }
    } else {
      line += " [" + port.bit_width.expression() + "]";
    }
    line += " " + port.name;
  }
  return line;
}

InstructionPair format_pair(const ModuleRecord& record, std::int64_t source_id) {
  InstructionPair pair;
  pair.prompt = std::string(kSystemPrompt) + "\n\n" +
                "Generate Verilog code for a module named " + record.module_name +
                " with the following ports and description:" + "\n\n" +
                render_port_line(record.ports) + "\n\n" + record.description;
  pair.response = record.verilog_code;
  pair.source_id = source_id;
  pair.token_count = record.token_count;
  return pair;
}

std::string pair_to_json(const InstructionPair& pair) {
  nlohmann::ordered_json j;
  j["prompt"] = pair.prompt;
  j["response"] = pair.response;
  j["source_id"] = pair.source_id;
  j["token_count"] = pair.token_count;
  return j.dump();
}

PairExportCounts export_pairs(const ModuleStore& store,
                              std::optional<std::int64_t> budget,
                              const std::filesystem::path& out_path) {
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreError("IoError: cannot open " + out_path.string());

  PairExportCounts counts;
  for (const ModuleStore::StoredRecord& stored : store.query_modules()) {
    if (budget && stored.record.token_count > *budget) {
      ++counts.skipped;
      continue;
    }
    out << pair_to_json(format_pair(stored.record, stored.id)) << '\n';
    ++counts.emitted;
  }
  if (!out) throw StoreError("IoError: write failed for " + out_path.string());
  return counts;
}

}  // namespace forge
