#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus_model.hpp"

namespace forge {

// ---------------------------------------------------------------------------
// Module discovery
// ---------------------------------------------------------------------------

// One live `module ... endmodule` region. Offsets are bytes into the source
// text; the region text is kept verbatim (whitespace is never normalized so
// the dataset preserves real-world formatting).
struct ModuleRegion {
  std::string name;
  std::size_t begin = 0;         // at the `module` keyword
  std::size_t end = 0;           // one past `endmodule`
  std::size_t header_end = 0;    // one past the `;` closing the declaration
};

// Finds every live module region in source order. Declarations inside
// comments or strings are ignored. Problems (missing name, unterminated
// module) are appended to `issues` when given; affected regions are skipped.
std::vector<ModuleRegion> find_modules(std::string_view source,
                                       std::vector<std::string>* issues = nullptr);

// ---------------------------------------------------------------------------
// Parameters and widths
// ---------------------------------------------------------------------------

// Evaluated constants of in-scope parameter/localparam declarations, both
// `#(parameter ...)` header style and body statements.
struct ParamEnv {
  std::map<std::string, long long> bindings;

  bool operator==(const ParamEnv&) const = default;
};

ParamEnv collect_parameters(std::string_view module_text);

// Evaluates `[H:L]` (brackets optional) over {+, -, *, parentheses, decimal
// literals, bound parameters} to |H-L|+1. Anything else — unbound
// identifier, macro, unsupported operator — yields Unresolved with the
// original range text. Unresolved is a value, not an error.
BitWidth resolve_width(std::string_view range_expr, const ParamEnv& env);

// Evaluates a plain integer expression; nullopt when not evaluable.
std::optional<long long> eval_const_expr(std::string_view expr, const ParamEnv& env);

// ---------------------------------------------------------------------------
// Ports
// ---------------------------------------------------------------------------

class PortListError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses the ports of one module region (text starting at its `module`
// keyword). Handles ANSI headers, non-ANSI bodies, comma-grouped
// declarations, and the wire/reg/signed modifiers. Throws PortListError
// when a declared port cannot be resolved to a direction.
std::vector<PortSpec> parse_ports(std::string_view module_text, const ParamEnv& env);

// ---------------------------------------------------------------------------
// Comments and tokens
// ---------------------------------------------------------------------------

// Comment bodies in source order, delimiters stripped, surrounding
// whitespace trimmed, empty comments dropped. Comment-like text inside
// string literals is excluded.
std::vector<std::string> extract_comments(std::string_view source);

// Token estimate for context-budget accounting: the number of maximal
// whitespace-delimited chunks. Deliberately simple so counts are
// reproducible across runs and languages; see README for the exact rule.
std::int64_t estimate_tokens(std::string_view source);

// ---------------------------------------------------------------------------
// Descriptions
// ---------------------------------------------------------------------------

class DescriptionClient {
 public:
  virtual ~DescriptionClient() = default;
  // One-sentence description for the draft record, or nullopt when the
  // client is unavailable (callers fall back to the template client).
  virtual std::optional<std::string> describe(const ModuleRecord& draft) = 0;
  virtual DescriptionSource source() const = 0;
};

// Deterministic offline client composing from the module name, port
// directions, and a sequential/combinational heuristic.
class TemplateFallbackClient final : public DescriptionClient {
 public:
  std::optional<std::string> describe(const ModuleRecord& draft) override;
  DescriptionSource source() const override { return DescriptionSource::TemplateFallback; }
};

struct EndpointConfig {
  std::string host;        // e.g. "api.example.com" or "localhost"
  int port = 443;
  bool https = true;
  std::string path = "/v1/chat/completions";
  std::string model = "o3-mini";
  std::string api_key;     // empty: no Authorization header
  int max_retries = 2;     // exponential backoff between attempts
  int backoff_ms = 500;
  int min_request_interval_ms = 0;  // crude rate limit
};

// Remote model client speaking the chat-completions shape. Requests are
// serialized across threads. Any transport or protocol failure yields
// nullopt so extraction can continue offline.
class ExternalModelClient final : public DescriptionClient {
 public:
  explicit ExternalModelClient(EndpointConfig config);
  ~ExternalModelClient() override;
  std::optional<std::string> describe(const ModuleRecord& draft) override;
  DescriptionSource source() const override { return DescriptionSource::ExternalModel; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// The request text sent for a module's code.
std::string build_description_prompt(std::string_view verilog_code);

// Guarantees the <=40-word, terminal-period contract: sentence-boundary
// truncation first, hard trim as the last resort.
std::string enforce_description_contract(std::string text);

// Asks the client (re-asking once if the reply breaks the word contract),
// falls back to the template client when unavailable, and enforces the
// contract on whatever came back.
std::string generate_description(const ModuleRecord& draft, DescriptionClient& client,
                                 DescriptionSource* used = nullptr);

// ---------------------------------------------------------------------------
// Whole-corpus extraction
// ---------------------------------------------------------------------------

struct ExtractResult {
  std::vector<ModuleRecord> records;        // canonical order: path, then in-file
  std::vector<std::string> record_sources;  // parallel to records: source path
  StageReport report;  // stage DbValidation; extraction failures only
};

// One record per discovered module across the synthesizable files.
// Per-module failures (unparseable ports, invariant violations) are
// rejections, never fatal.
ExtractResult extract_records(const std::vector<SourceFile>& files,
                              DescriptionClient& client);

}  // namespace forge
