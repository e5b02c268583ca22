#include "forge/corpus_model.hpp"

#include <cctype>

#include "json.hpp"

namespace forge {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Origin
// ---------------------------------------------------------------------------

std::string origin_to_string(const Origin& origin) {
  switch (origin.kind) {
    case OriginKind::GitHub: return "GitHub";
    case OriginKind::OpenCores: return "OpenCores";
    case OriginKind::Academic: return "Academic";
    case OriginKind::Other: return origin.label.empty() ? "Other" : origin.label;
  }
  return "Other";
}

Origin origin_from_string(std::string_view text) {
  if (text == "GitHub") return {OriginKind::GitHub, ""};
  if (text == "OpenCores") return {OriginKind::OpenCores, ""};
  if (text == "Academic") return {OriginKind::Academic, ""};
  Origin o{OriginKind::Other, std::string(text)};
  if (o.label == "Other") o.label.clear();
  return o;
}

// ---------------------------------------------------------------------------
// UTF-8 with replacement
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";  // U+FFFD

// Length of a valid UTF-8 sequence starting at src[i], or 0 when invalid.
std::size_t utf8_sequence_length(std::string_view src, std::size_t i) {
  const auto byte = static_cast<unsigned char>(src[i]);
  std::size_t len = 0;
  if (byte < 0x80) return 1;
  if ((byte & 0xE0) == 0xC0) len = 2;
  else if ((byte & 0xF0) == 0xE0) len = 3;
  else if ((byte & 0xF8) == 0xF0) len = 4;
  else return 0;
  if (i + len > src.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(src[i + k]) & 0xC0) != 0x80) return 0;
  }
  // Reject overlong encodings and out-of-range code points.
  if (len == 2 && byte < 0xC2) return 0;
  if (len == 3 && byte == 0xE0 &&
      static_cast<unsigned char>(src[i + 1]) < 0xA0) return 0;
  if (len == 4 && (byte > 0xF4 || (byte == 0xF0 &&
      static_cast<unsigned char>(src[i + 1]) < 0x90))) return 0;
  return len;
}

}  // namespace

std::string utf8_with_replacement(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::size_t len = utf8_sequence_length(bytes, i);
    if (len == 0) {
      out += kReplacement;
      ++i;
    } else {
      out.append(bytes.substr(i, len));
      i += len;
    }
  }
  return out;
}

std::string SourceFile::text() const { return utf8_with_replacement(content); }

// ---------------------------------------------------------------------------
// Ports
// ---------------------------------------------------------------------------

std::string_view port_direction_to_string(PortDirection dir) {
  switch (dir) {
    case PortDirection::Input: return "input";
    case PortDirection::Output: return "output";
    case PortDirection::Inout: return "inout";
  }
  return "input";
}

std::optional<PortDirection> port_direction_from_string(std::string_view text) {
  if (text == "input") return PortDirection::Input;
  if (text == "output") return PortDirection::Output;
  if (text == "inout") return PortDirection::Inout;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Record validation
// ---------------------------------------------------------------------------

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    const bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!ws && !in_word) ++count;
    in_word = !ws;
  }
  return count;
}

bool description_contract_ok(std::string_view text) {
  if (text.empty()) return false;
  std::size_t end = text.find_last_not_of(" \t\r\n");
  if (end == std::string_view::npos || text[end] != '.') return false;
  return word_count(text) <= 40;
}

std::vector<std::string> validate_record(const ModuleRecord& record) {
  std::vector<std::string> violations;
  if (record.module_name.empty()) violations.push_back("module_name is empty");
  if (record.verilog_code.empty()) violations.push_back("verilog_code is empty");
  if (record.token_count < 0) violations.push_back("token_count is negative");
  if (!description_contract_ok(record.description))
    violations.push_back("description violates the <=40-word/period contract");
  for (const PortSpec& port : record.ports) {
    if (port.name.empty()) violations.push_back("port with empty name");
    if (port.bit_width.is_resolved() && port.bit_width.width() < 1)
      violations.push_back("port '" + port.name + "' has width < 1");
  }
  return violations;
}

// ---------------------------------------------------------------------------
// Record JSON
// ---------------------------------------------------------------------------

namespace {

ordered_json port_to_json(const PortSpec& port) {
  ordered_json p;
  p["name"] = port.name;
  p["direction"] = std::string(port_direction_to_string(port.direction));
  if (port.bit_width.is_resolved()) {
    p["bit_width"] = port.bit_width.width();
  } else {
    p["bit_width"] = port.bit_width.expression();
  }
  return p;
}

PortSpec port_from_json(const ordered_json& p) {
  if (!p.is_object()) {
    throw RecordError(RecordErrorKind::MalformedJson, "port entry is not an object");
  }
  for (const std::string key : {"name", "direction", "bit_width"}) {
    if (!p.contains(key)) {
      throw RecordError(RecordErrorKind::MissingField, key);
    }
  }
  for (auto it = p.begin(); it != p.end(); ++it) {
    if (it.key() != "name" && it.key() != "direction" && it.key() != "bit_width") {
      throw RecordError(RecordErrorKind::InvariantViolation,
                        "unknown port key '" + it.key() + "'");
    }
  }
  PortSpec port;
  if (!p["name"].is_string()) {
    throw RecordError(RecordErrorKind::MalformedJson, "port name is not a string");
  }
  port.name = p["name"].get<std::string>();
  if (!p["direction"].is_string()) {
    throw RecordError(RecordErrorKind::MalformedJson, "port direction is not a string");
  }
  const auto dir = port_direction_from_string(p["direction"].get<std::string>());
  if (!dir) {
    throw RecordError(RecordErrorKind::InvariantViolation,
                      "illegal port direction '" + p["direction"].get<std::string>() + "'");
  }
  port.direction = *dir;
  const auto& width = p["bit_width"];
  if (width.is_number_integer()) {
    const auto w = width.get<std::int64_t>();
    if (w < 1) {
      throw RecordError(RecordErrorKind::InvariantViolation, "bit_width < 1");
    }
    port.bit_width = BitWidth::resolved(static_cast<int>(w));
  } else if (width.is_string()) {
    port.bit_width = BitWidth::unresolved(width.get<std::string>());
  } else {
    throw RecordError(RecordErrorKind::MalformedJson,
                      "bit_width is neither integer nor expression text");
  }
  return port;
}

}  // namespace

std::string serialize_record(const ModuleRecord& record) {
  ordered_json j;
  j["module_name"] = record.module_name;
  j["ports"] = ordered_json::array();
  for (const PortSpec& port : record.ports) j["ports"].push_back(port_to_json(port));
  j["comments"] = record.comments;
  j["verilog_code"] = record.verilog_code;
  j["token_count"] = record.token_count;
  j["description"] = record.description;
  return j.dump();
}

ModuleRecord deserialize_record(std::string_view json_text) {
  ordered_json j = ordered_json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw RecordError(RecordErrorKind::MalformedJson, "input is not a JSON object");
  }
  static const char* const kKeys[] = {"module_name", "ports",       "comments",
                                      "verilog_code", "token_count", "description"};
  for (const char* key : kKeys) {
    if (!j.contains(key)) throw RecordError(RecordErrorKind::MissingField, key);
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : kKeys) known = known || it.key() == key;
    if (!known) {
      throw RecordError(RecordErrorKind::InvariantViolation,
                        "unknown key '" + it.key() + "'");
    }
  }

  ModuleRecord record;
  if (!j["module_name"].is_string()) {
    throw RecordError(RecordErrorKind::MalformedJson, "module_name is not a string");
  }
  record.module_name = j["module_name"].get<std::string>();
  if (record.module_name.empty()) {
    throw RecordError(RecordErrorKind::InvariantViolation, "module_name is empty");
  }
  if (!j["ports"].is_array()) {
    throw RecordError(RecordErrorKind::MalformedJson, "ports is not an array");
  }
  for (const auto& p : j["ports"]) record.ports.push_back(port_from_json(p));
  if (!j["comments"].is_array()) {
    throw RecordError(RecordErrorKind::MalformedJson, "comments is not an array");
  }
  for (const auto& c : j["comments"]) {
    if (!c.is_string()) {
      throw RecordError(RecordErrorKind::MalformedJson, "comment entry is not a string");
    }
    record.comments.push_back(c.get<std::string>());
  }
  if (!j["verilog_code"].is_string()) {
    throw RecordError(RecordErrorKind::MalformedJson, "verilog_code is not a string");
  }
  record.verilog_code = j["verilog_code"].get<std::string>();
  if (!j["token_count"].is_number_integer()) {
    throw RecordError(RecordErrorKind::MalformedJson, "token_count is not an integer");
  }
  record.token_count = j["token_count"].get<std::int64_t>();
  if (record.token_count < 0) {
    throw RecordError(RecordErrorKind::InvariantViolation, "token_count is negative");
  }
  if (!j["description"].is_string()) {
    throw RecordError(RecordErrorKind::MalformedJson, "description is not a string");
  }
  record.description = j["description"].get<std::string>();
  return record;
}

// ---------------------------------------------------------------------------
// Stage reports
// ---------------------------------------------------------------------------

std::string_view stage_to_string(Stage stage) {
  switch (stage) {
    case Stage::Filter: return "Filter";
    case Stage::Dedup: return "Dedup";
    case Stage::Syntax: return "Syntax";
    case Stage::Synthesis: return "Synthesis";
    case Stage::DbValidation: return "DbValidation";
  }
  return "Filter";
}

std::optional<Stage> stage_from_string(std::string_view text) {
  if (text == "Filter") return Stage::Filter;
  if (text == "Dedup") return Stage::Dedup;
  if (text == "Syntax") return Stage::Syntax;
  if (text == "Synthesis") return Stage::Synthesis;
  if (text == "DbValidation") return Stage::DbValidation;
  return std::nullopt;
}

std::optional<double> StageReport::retention_percent() const {
  if (input_bytes <= 0) return std::nullopt;
  return 100.0 * static_cast<double>(output_bytes) / static_cast<double>(input_bytes);
}

std::string stage_report_to_json(const StageReport& report) {
  ordered_json j;
  j["stage"] = std::string(stage_to_string(report.stage));
  j["input_count"] = report.input_count;
  j["output_count"] = report.output_count;
  j["input_bytes"] = report.input_bytes;
  j["output_bytes"] = report.output_bytes;
  auto entry_list = [](const std::vector<Rejection>& entries) {
    ordered_json arr = ordered_json::array();
    for (const Rejection& r : entries) {
      ordered_json e;
      e["path"] = r.path;
      e["reason"] = r.reason;
      arr.push_back(e);
    }
    return arr;
  };
  j["rejections"] = entry_list(report.rejections);
  j["annotations"] = entry_list(report.annotations);
  return j.dump(2) + "\n";
}

StageReport stage_report_from_json(std::string_view json_text) {
  ordered_json j = ordered_json::parse(json_text);
  StageReport report;
  const auto stage = stage_from_string(j.at("stage").get<std::string>());
  if (!stage) throw std::runtime_error("unknown stage name in report");
  report.stage = *stage;
  report.input_count = j.at("input_count").get<std::int64_t>();
  report.output_count = j.at("output_count").get<std::int64_t>();
  report.input_bytes = j.at("input_bytes").get<std::int64_t>();
  report.output_bytes = j.at("output_bytes").get<std::int64_t>();
  auto read_entries = [](const ordered_json& arr) {
    std::vector<Rejection> entries;
    for (const auto& e : arr) {
      entries.push_back({e.at("path").get<std::string>(), e.at("reason").get<std::string>()});
    }
    return entries;
  };
  report.rejections = read_entries(j.at("rejections"));
  if (j.contains("annotations")) report.annotations = read_entries(j.at("annotations"));
  return report;
}

}  // namespace forge
