#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace forge {

// ---------------------------------------------------------------------------
// Provenance
// ---------------------------------------------------------------------------

enum class OriginKind { GitHub, OpenCores, Academic, Other };

struct Origin {
  OriginKind kind = OriginKind::Other;
  std::string label;  // free-form source name when kind == Other

  bool operator==(const Origin&) const = default;
};

std::string origin_to_string(const Origin& origin);
Origin origin_from_string(std::string_view text);

// ---------------------------------------------------------------------------
// Source files and projects
// ---------------------------------------------------------------------------

// One candidate Verilog file. `content` holds the raw bytes as read from
// disk; hashing works on those bytes, parsing works on `text()` where any
// invalid UTF-8 sequence is replaced with U+FFFD.
struct SourceFile {
  std::string path;  // relative, '/'-separated, non-empty
  std::string content;
  Origin origin;
  std::string project_id;

  std::string text() const;

  bool operator==(const SourceFile&) const = default;
};

// Replaces invalid UTF-8 sequences with U+FFFD, leaving valid text untouched.
std::string utf8_with_replacement(std::string_view bytes);

// A group of files sharing one original directory tree; the unit the
// synthesis stage operates on.
struct ProjectUnit {
  std::string project_id;
  std::string root;  // directory the file paths are relative to
  std::vector<SourceFile> files;  // canonical (lexicographic) path order
  std::string notes;

  bool operator==(const ProjectUnit&) const = default;
};

// ---------------------------------------------------------------------------
// Ports and module records
// ---------------------------------------------------------------------------

enum class PortDirection { Input, Output, Inout };

std::string_view port_direction_to_string(PortDirection dir);
std::optional<PortDirection> port_direction_from_string(std::string_view text);

// A resolved wire count (>= 1), or the original range expression when it
// could not be evaluated (unbound parameter, macro, unsupported operator).
class BitWidth {
 public:
  BitWidth() : value_(1) {}
  static BitWidth resolved(int width) { return BitWidth(width); }
  static BitWidth unresolved(std::string expr) { return BitWidth(std::move(expr)); }

  bool is_resolved() const { return std::holds_alternative<int>(value_); }
  int width() const { return std::get<int>(value_); }
  const std::string& expression() const { return std::get<std::string>(value_); }

  bool operator==(const BitWidth&) const = default;

 private:
  explicit BitWidth(int width) : value_(width) {}
  explicit BitWidth(std::string expr) : value_(std::move(expr)) {}
  std::variant<int, std::string> value_;
};

struct PortSpec {
  std::string name;
  PortDirection direction = PortDirection::Input;
  BitWidth bit_width;

  bool operator==(const PortSpec&) const = default;
};

// Where a record's description came from. Diagnostic only; not serialized
// and not part of record equality.
enum class DescriptionSource { Unknown, ExternalModel, TemplateFallback };

// The extracted artifact: everything the downstream dataset keeps about one
// Verilog module. `verilog_code` is the exact byte substring of the source
// region, formatting and comments untouched.
struct ModuleRecord {
  std::string module_name;
  std::vector<PortSpec> ports;
  std::vector<std::string> comments;
  std::string verilog_code;
  std::int64_t token_count = 0;
  std::string description;

  DescriptionSource description_source = DescriptionSource::Unknown;

  bool operator==(const ModuleRecord& other) const {
    return module_name == other.module_name && ports == other.ports &&
           comments == other.comments && verilog_code == other.verilog_code &&
           token_count == other.token_count && description == other.description;
  }
};

// Returns the list of invariant violations, empty when the record is valid.
std::vector<std::string> validate_record(const ModuleRecord& record);

// Whitespace-delimited word count, used by the description contract.
std::size_t word_count(std::string_view text);

// True iff `text` is a non-empty, <= 40 word sentence ending with a period.
bool description_contract_ok(std::string_view text);

// ---------------------------------------------------------------------------
// Record JSON
// ---------------------------------------------------------------------------

enum class RecordErrorKind { MalformedJson, MissingField, InvariantViolation };

class RecordError : public std::runtime_error {
 public:
  RecordError(RecordErrorKind kind, std::string detail)
      : std::runtime_error(detail), kind_(kind), detail_(std::move(detail)) {}
  RecordErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  RecordErrorKind kind_;
  std::string detail_;
};

// One compact JSON object with exactly the keys
//   module_name, ports, comments, verilog_code, token_count, description
// in that order. Deterministic: identical records produce identical bytes.
std::string serialize_record(const ModuleRecord& record);

// Inverse of serialize_record. Unknown keys are rejected. Throws RecordError.
ModuleRecord deserialize_record(std::string_view json_text);

// ---------------------------------------------------------------------------
// Stage accounting
// ---------------------------------------------------------------------------

enum class Stage { Filter, Dedup, Syntax, Synthesis, DbValidation };

std::string_view stage_to_string(Stage stage);
std::optional<Stage> stage_from_string(std::string_view text);

struct Rejection {
  std::string path;
  std::string reason;

  bool operator==(const Rejection&) const = default;
};

struct StageReport {
  Stage stage = Stage::Filter;
  std::int64_t input_count = 0;
  std::int64_t output_count = 0;
  std::int64_t input_bytes = 0;
  std::int64_t output_bytes = 0;
  std::vector<Rejection> rejections;
  std::vector<Rejection> annotations;  // non-fatal flags, e.g. heuristic markers

  // 100 * output_bytes / input_bytes; empty when input_bytes == 0.
  std::optional<double> retention_percent() const;

  bool operator==(const StageReport&) const = default;
};

std::string stage_report_to_json(const StageReport& report);
StageReport stage_report_from_json(std::string_view json_text);

}  // namespace forge
