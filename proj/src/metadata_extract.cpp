#include "forge/metadata_extract.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <mutex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

#include "forge/verilog_lex.hpp"

namespace forge {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

std::size_t skip_ws(std::string_view text, std::size_t i) {
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  return i;
}

std::string_view read_identifier(std::string_view text, std::size_t& i) {
  if (i >= text.size() || !is_ident_start(text[i])) return {};
  const std::size_t start = i;
  while (i < text.size() && (vlex::is_identifier_char(text[i]))) ++i;
  return text.substr(start, i - start);
}

// Word-boundary find on masked text.
std::size_t find_word(std::string_view text, std::string_view word, std::size_t from) {
  std::size_t pos = from;
  while ((pos = text.find(word, pos)) != std::string_view::npos) {
    const bool left_ok = pos == 0 || !vlex::is_identifier_char(text[pos - 1]);
    const std::size_t after = pos + word.size();
    const bool right_ok = after >= text.size() || !vlex::is_identifier_char(text[after]);
    if (left_ok && right_ok) return pos;
    ++pos;
  }
  return std::string_view::npos;
}

std::string trim_copy(std::string_view s) {
  const std::size_t first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return "";
  const std::size_t last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// Module discovery
// ---------------------------------------------------------------------------

std::vector<ModuleRegion> find_modules(std::string_view source,
                                       std::vector<std::string>* issues) {
  std::vector<ModuleRegion> regions;
  const std::string masked = vlex::mask_non_code(source);
  std::size_t i = 0;
  while (i < masked.size()) {
    const std::size_t pos = find_word(masked, "module", i);
    if (pos == std::string_view::npos) break;

    std::size_t j = skip_ws(masked, pos + 6);
    const std::string_view name = read_identifier(masked, j);
    if (name.empty()) {
      if (issues) issues->push_back("module keyword without a name");
      i = pos + 6;
      continue;
    }

    const std::size_t end_kw = find_word(masked, "endmodule", j);
    if (end_kw == std::string_view::npos) {
      if (issues) issues->push_back("unterminated module '" + std::string(name) + "'");
      break;
    }
    const std::size_t end = end_kw + 9;

    // Declaration ends at the first ';' outside parentheses.
    std::size_t header_end = j;
    int depth = 0;
    for (std::size_t k = j; k < end_kw; ++k) {
      const char c = masked[k];
      if (c == '(') ++depth;
      else if (c == ')') --depth;
      else if (c == ';' && depth <= 0) {
        header_end = k + 1;
        break;
      }
    }

    regions.push_back({std::string(name), pos, end, header_end});
    i = end;
  }
  return regions;
}

// ---------------------------------------------------------------------------
// Constant expressions
// ---------------------------------------------------------------------------

namespace {

// Minimal expression grammar over {+, -, *, parens, decimal ints, bound
// parameters}. Anything else fails, and the caller treats the width as
// unresolved.
class ExprParser {
 public:
  ExprParser(std::string_view text, const ParamEnv& env) : text_(text), env_(env) {}

  std::optional<long long> parse() {
    auto value = parse_sum();
    pos_ = skip_ws(text_, pos_);
    if (!value || pos_ != text_.size()) return std::nullopt;
    return value;
  }

 private:
  std::optional<long long> parse_sum() {
    auto left = parse_product();
    while (left) {
      pos_ = skip_ws(text_, pos_);
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        const char op = text_[pos_++];
        const auto right = parse_product();
        if (!right) return std::nullopt;
        left = op == '+' ? *left + *right : *left - *right;
      } else {
        break;
      }
    }
    return left;
  }

  std::optional<long long> parse_product() {
    auto left = parse_factor();
    while (left) {
      pos_ = skip_ws(text_, pos_);
      if (pos_ < text_.size() && text_[pos_] == '*') {
        ++pos_;
        const auto right = parse_factor();
        if (!right) return std::nullopt;
        left = *left * *right;
      } else {
        break;
      }
    }
    return left;
  }

  std::optional<long long> parse_factor() {
    pos_ = skip_ws(text_, pos_);
    if (pos_ >= text_.size()) return std::nullopt;
    const char c = text_[pos_];
    if (c == '+' || c == '-') {
      ++pos_;
      const auto inner = parse_factor();
      if (!inner) return std::nullopt;
      return c == '-' ? -*inner : *inner;
    }
    if (c == '(') {
      ++pos_;
      const auto inner = parse_sum();
      pos_ = skip_ws(text_, pos_);
      if (!inner || pos_ >= text_.size() || text_[pos_] != ')') return std::nullopt;
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long long value = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        value = value * 10 + (text_[pos_] - '0');
        ++pos_;
      }
      // A based literal like 8'd16 is out of the supported grammar.
      if (pos_ < text_.size() &&
          (text_[pos_] == '\'' || is_ident_start(text_[pos_]))) {
        return std::nullopt;
      }
      return value;
    }
    if (is_ident_start(c)) {
      const std::string_view name = read_identifier(text_, pos_);
      const auto it = env_.bindings.find(std::string(name));
      if (it == env_.bindings.end()) return std::nullopt;
      return it->second;
    }
    return std::nullopt;
  }

  std::string_view text_;
  const ParamEnv& env_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<long long> eval_const_expr(std::string_view expr, const ParamEnv& env) {
  return ExprParser(expr, env).parse();
}

BitWidth resolve_width(std::string_view range_expr, const ParamEnv& env) {
  std::string inner = trim_copy(range_expr);
  if (!inner.empty() && inner.front() == '[' && inner.back() == ']') {
    inner = trim_copy(std::string_view(inner).substr(1, inner.size() - 2));
  }
  // Split msb:lsb at the last colon outside brackets/parens.
  int depth = 0;
  std::size_t colon = std::string::npos;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const char c = inner[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    else if (c == ')' || c == ']' || c == '}') --depth;
    else if (c == ':' && depth == 0) colon = i;
  }
  if (colon == std::string::npos) return BitWidth::unresolved(inner);
  const auto msb = eval_const_expr(std::string_view(inner).substr(0, colon), env);
  const auto lsb = eval_const_expr(std::string_view(inner).substr(colon + 1), env);
  if (!msb || !lsb) return BitWidth::unresolved(inner);
  const long long width = (*msb > *lsb ? *msb - *lsb : *lsb - *msb) + 1;
  if (width < 1 || width > std::numeric_limits<int>::max()) {
    return BitWidth::unresolved(inner);
  }
  return BitWidth::resolved(static_cast<int>(width));
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

ParamEnv collect_parameters(std::string_view module_text) {
  ParamEnv env;
  const std::string masked = vlex::mask_non_code(module_text);
  std::size_t i = 0;
  while (i < masked.size()) {
    std::size_t pos = find_word(masked, "parameter", i);
    const std::size_t local_pos = find_word(masked, "localparam", i);
    std::size_t kw_len = 9;
    if (local_pos != std::string_view::npos &&
        (pos == std::string_view::npos || local_pos < pos)) {
      pos = local_pos;
      kw_len = 10;
    }
    if (pos == std::string_view::npos) break;

    std::size_t k = pos + kw_len;
    // Optional type words and one optional packed range.
    while (true) {
      k = skip_ws(masked, k);
      std::size_t probe = k;
      const std::string_view word = read_identifier(masked, probe);
      if (word == "integer" || word == "signed" || word == "unsigned" ||
          word == "real" || word == "time" || word == "reg" || word == "logic") {
        k = probe;
        continue;
      }
      if (k < masked.size() && masked[k] == '[') {
        const std::size_t close = masked.find(']', k);
        if (close == std::string::npos) break;
        k = close + 1;
        continue;
      }
      break;
    }

    // name = expr {, name = expr}
    while (true) {
      k = skip_ws(masked, k);
      std::size_t probe = k;
      const std::string_view name = read_identifier(masked, probe);
      if (name.empty()) break;
      k = skip_ws(masked, probe);
      if (k >= masked.size() || masked[k] != '=') break;
      ++k;
      const std::size_t expr_start = k;
      int depth = 0;
      while (k < masked.size()) {
        const char c = masked[k];
        if (c == '(' || c == '[' || c == '{') ++depth;
        else if (c == ')' && depth == 0) break;
        else if (c == ')' || c == ']' || c == '}') --depth;
        else if ((c == ',' || c == ';') && depth == 0) break;
        ++k;
      }
      const auto value =
          eval_const_expr(masked.substr(expr_start, k - expr_start), env);
      if (value) env.bindings[std::string(name)] = *value;

      if (k < masked.size() && masked[k] == ',') {
        ++k;
        std::size_t ahead = skip_ws(masked, k);
        std::size_t probe2 = ahead;
        const std::string_view next_word = read_identifier(masked, probe2);
        if (next_word == "parameter" || next_word == "localparam") break;
        continue;
      }
      break;
    }
    i = k > pos ? k : pos + kw_len;
  }
  return env;
}

// ---------------------------------------------------------------------------
// Ports
// ---------------------------------------------------------------------------

namespace {

struct HeaderLayout {
  std::size_t ports_begin = std::string::npos;  // inside the port parens
  std::size_t ports_end = std::string::npos;
  std::size_t header_end = 0;  // one past the closing ';'
};

// Locates `#(...)` and `(...)` blocks after the module name on masked text.
HeaderLayout locate_header(std::string_view masked) {
  HeaderLayout layout;
  std::size_t i = find_word(masked, "module", 0);
  if (i == std::string_view::npos) throw PortListError("no module keyword");
  i = skip_ws(masked, i + 6);
  read_identifier(masked, i);

  i = skip_ws(masked, i);
  if (i < masked.size() && masked[i] == '#') {
    i = skip_ws(masked, i + 1);
    if (i >= masked.size() || masked[i] != '(')
      throw PortListError("malformed parameter block");
    int depth = 0;
    while (i < masked.size()) {
      if (masked[i] == '(') ++depth;
      else if (masked[i] == ')' && --depth == 0) { ++i; break; }
      ++i;
    }
  }

  i = skip_ws(masked, i);
  if (i < masked.size() && masked[i] == '(') {
    layout.ports_begin = i + 1;
    int depth = 0;
    while (i < masked.size()) {
      if (masked[i] == '(') ++depth;
      else if (masked[i] == ')' && --depth == 0) {
        layout.ports_end = i;
        ++i;
        break;
      }
      ++i;
    }
    if (layout.ports_end == std::string::npos)
      throw PortListError("unterminated port list");
  }

  i = skip_ws(masked, i);
  if (i < masked.size() && masked[i] == ';') ++i;
  layout.header_end = i;
  return layout;
}

std::vector<std::string> split_top_level(std::string_view text, char sep) {
  std::vector<std::string> items;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const char c = i < text.size() ? text[i] : sep;
    if (c == '(' || c == '[' || c == '{') ++depth;
    else if (c == ')' || c == ']' || c == '}') --depth;
    else if (c == sep && depth == 0) {
      items.push_back(trim_copy(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  return items;
}

const char* kPortModifiers[] = {"wire", "reg", "logic", "signed", "tri", "var"};

std::optional<PortDirection> consume_direction(std::string_view text, std::size_t& i) {
  std::size_t probe = skip_ws(text, i);
  std::size_t after = probe;
  const std::string_view word = read_identifier(text, after);
  const auto dir = port_direction_from_string(word);
  if (dir) i = after;
  return dir;
}

void consume_modifiers(std::string_view text, std::size_t& i) {
  while (true) {
    std::size_t probe = skip_ws(text, i);
    std::size_t after = probe;
    const std::string_view word = read_identifier(text, after);
    bool matched = false;
    for (const char* mod : kPortModifiers) {
      if (word == mod) { matched = true; break; }
    }
    if (!matched) { i = probe; return; }
    i = after;
  }
}

std::optional<std::string> consume_range(std::string_view text, std::size_t& i) {
  i = skip_ws(text, i);
  if (i >= text.size() || text[i] != '[') return std::nullopt;
  int depth = 0;
  const std::size_t start = i;
  while (i < text.size()) {
    if (text[i] == '[') ++depth;
    else if (text[i] == ']' && --depth == 0) {
      ++i;
      return std::string(text.substr(start, i - start));
    }
    ++i;
  }
  throw PortListError("unterminated range");
}

struct DeclaredPort {
  std::string name;
  PortDirection direction;
  std::optional<std::string> range;
};

PortSpec to_spec(const DeclaredPort& port, const ParamEnv& env) {
  PortSpec spec;
  spec.name = port.name;
  spec.direction = port.direction;
  spec.bit_width = port.range ? resolve_width(*port.range, env) : BitWidth::resolved(1);
  return spec;
}

}  // namespace

std::vector<PortSpec> parse_ports(std::string_view module_text, const ParamEnv& env) {
  const std::string masked = vlex::mask_non_code(module_text);
  const HeaderLayout layout = locate_header(masked);
  if (layout.ports_begin == std::string::npos) return {};  // `module foo;`

  const std::string_view port_block = std::string_view(masked).substr(
      layout.ports_begin, layout.ports_end - layout.ports_begin);
  if (trim_copy(port_block).empty()) return {};  // `module foo ();`

  std::vector<DeclaredPort> ansi_ports;
  std::vector<std::string> bare_names;
  std::optional<PortDirection> current_direction;
  std::optional<std::string> current_range;

  for (const std::string& item : split_top_level(port_block, ',')) {
    if (item.empty()) continue;
    std::size_t i = 0;
    const auto direction = consume_direction(item, i);
    if (direction) {
      if (!bare_names.empty()) {
        throw PortListError("mixed ANSI and non-ANSI port list");
      }
      current_direction = direction;
      consume_modifiers(item, i);
      current_range = consume_range(item, i);
      i = skip_ws(item, i);
      std::string_view name = read_identifier(item, i);
      if (name.empty()) throw PortListError("direction without a port name");
      if (!trim_copy(std::string_view(item).substr(i)).empty()) {
        throw PortListError("cannot parse port item '" + item + "'");
      }
      ansi_ports.push_back({std::string(name), *direction, current_range});
    } else {
      std::size_t i2 = skip_ws(item, 0);
      std::string_view name = read_identifier(item, i2);
      if (name.empty() || !trim_copy(std::string_view(item).substr(i2)).empty()) {
        throw PortListError("cannot parse port item '" + item + "'");
      }
      if (current_direction) {
        // Comma-grouped ANSI declaration: `input [7:0] a, b`.
        ansi_ports.push_back({std::string(name), *current_direction, current_range});
      } else {
        bare_names.push_back(std::string(name));
      }
    }
  }

  std::vector<PortSpec> specs;
  if (!ansi_ports.empty()) {
    specs.reserve(ansi_ports.size());
    for (const DeclaredPort& port : ansi_ports) specs.push_back(to_spec(port, env));
    return specs;
  }

  // Non-ANSI: directions live in body declarations after the header.
  std::map<std::string, DeclaredPort> declared;
  const std::string_view body = std::string_view(masked).substr(layout.header_end);
  std::size_t i = 0;
  while (i < body.size()) {
    std::size_t next = std::string_view::npos;
    for (const char* kw : {"input", "output", "inout"}) {
      const std::size_t pos = find_word(body, kw, i);
      if (pos != std::string_view::npos && pos < next) next = pos;
    }
    if (next == std::string_view::npos) break;

    std::size_t k = next;
    const auto direction = consume_direction(body, k);
    if (!direction) { i = next + 1; continue; }
    consume_modifiers(body, k);
    std::optional<std::string> range;
    try {
      range = consume_range(body, k);
    } catch (const PortListError&) {
      i = k;
      continue;
    }
    // Name list up to ';'.
    while (true) {
      k = skip_ws(body, k);
      std::string_view name = read_identifier(body, k);
      if (name.empty()) break;
      declared.try_emplace(std::string(name),
                           DeclaredPort{std::string(name), *direction, range});
      k = skip_ws(body, k);
      if (k < body.size() && body[k] == '=') {
        // Skip a default assignment expression.
        int depth = 0;
        while (k < body.size()) {
          const char c = body[k];
          if (c == '(' || c == '[' || c == '{') ++depth;
          else if (c == ')' || c == ']' || c == '}') --depth;
          else if ((c == ',' || c == ';') && depth == 0) break;
          ++k;
        }
      }
      if (k < body.size() && body[k] == ',') { ++k; continue; }
      break;
    }
    i = k > next ? k : next + 1;
  }

  specs.reserve(bare_names.size());
  for (const std::string& name : bare_names) {
    const auto it = declared.find(name);
    if (it == declared.end()) {
      throw PortListError("port '" + name + "' has no direction declaration");
    }
    specs.push_back(to_spec(it->second, env));
  }
  return specs;
}

// ---------------------------------------------------------------------------
// Comments and tokens
// ---------------------------------------------------------------------------

std::vector<std::string> extract_comments(std::string_view source) {
  std::vector<std::string> comments;
  for (const vlex::CommentSpan& span : vlex::comment_spans(source)) {
    std::string text = vlex::clean_comment_text(source, span);
    if (!text.empty()) comments.push_back(std::move(text));
  }
  return comments;
}

std::int64_t estimate_tokens(std::string_view source) {
  std::int64_t count = 0;
  bool in_chunk = false;
  for (const char c : source) {
    const bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!ws && !in_chunk) ++count;
    in_chunk = !ws;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Descriptions
// ---------------------------------------------------------------------------

std::optional<std::string> TemplateFallbackClient::describe(const ModuleRecord& draft) {
  int inputs = 0;
  int outputs = 0;
  int inouts = 0;
  for (const PortSpec& port : draft.ports) {
    switch (port.direction) {
      case PortDirection::Input: ++inputs; break;
      case PortDirection::Output: ++outputs; break;
      case PortDirection::Inout: ++inouts; break;
    }
  }

  const std::string masked = vlex::mask_non_code(draft.verilog_code);
  const bool sequential = vlex::contains_word(masked, "posedge") ||
                          vlex::contains_word(masked, "negedge");

  auto plural = [](int n, const char* noun) {
    return std::to_string(n) + " " + noun + (n == 1 ? "" : "s");
  };
  std::vector<std::string> parts;
  if (inputs > 0) parts.push_back(plural(inputs, "input"));
  if (outputs > 0) parts.push_back(plural(outputs, "output"));
  if (inouts > 0) parts.push_back(plural(inouts, "inout"));

  std::string ports_text;
  if (parts.empty()) {
    ports_text = "no ports";
  } else {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i > 0) ports_text += (i + 1 == parts.size()) ? " and " : ", ";
      ports_text += parts[i];
    }
  }
  return "Module " + draft.module_name + " with " + ports_text + " implementing " +
         (sequential ? "sequential" : "combinational") + " logic.";
}

std::string build_description_prompt(std::string_view verilog_code) {
  std::string prompt =
      "Describe what the following Verilog code does in 40 words or less, "
      "ending with a period: \n\n";
  prompt += verilog_code;
  prompt += "\n\n Focus on the module's core function.";
  return prompt;
}

struct ExternalModelClient::Impl {
  EndpointConfig config;
  std::mutex mutex;
  std::chrono::steady_clock::time_point last_request{};
};

ExternalModelClient::ExternalModelClient(EndpointConfig config)
    : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
}

ExternalModelClient::~ExternalModelClient() = default;

std::optional<std::string> ExternalModelClient::describe(const ModuleRecord& draft) {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  const EndpointConfig& cfg = impl_->config;
  if (cfg.host.empty()) return std::nullopt;

  if (cfg.min_request_interval_ms > 0) {
    const auto wait_until = impl_->last_request +
                            std::chrono::milliseconds(cfg.min_request_interval_ms);
    const auto now = std::chrono::steady_clock::now();
    if (now < wait_until) std::this_thread::sleep_for(wait_until - now);
  }

  nlohmann::json payload;
  payload["model"] = cfg.model;
  payload["messages"] = nlohmann::json::array(
      {{{"role", "user"}, {"content", build_description_prompt(draft.verilog_code)}}});
  const std::string body = payload.dump();

  httplib::Headers headers;
  if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
    }
    impl_->last_request = std::chrono::steady_clock::now();
    httplib::Result res;
    if (cfg.https) {
      httplib::SSLClient client(cfg.host, cfg.port);
      res = client.Post(cfg.path, headers, body, "application/json");
    } else {
      httplib::Client client(cfg.host, cfg.port);
      res = client.Post(cfg.path, headers, body, "application/json");
    }
    if (!res || res->status != 200) continue;
    try {
      const auto reply = nlohmann::json::parse(res->body);
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      if (content.is_string()) return content.get<std::string>();
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

std::string enforce_description_contract(std::string text) {
  std::string trimmed = trim_copy(text);
  if (trimmed.empty()) return "Module description unavailable.";

  if (word_count(trimmed) <= 40) {
    if (trimmed.back() != '.') trimmed += '.';
    return trimmed;
  }

  // Longest sentence prefix within the budget.
  std::size_t best_end = std::string::npos;
  for (std::size_t i = 0; i < trimmed.size(); ++i) {
    if (trimmed[i] != '.') continue;
    const std::string_view prefix(trimmed.data(), i + 1);
    if (word_count(prefix) <= 40) best_end = i + 1;
    else break;
  }
  if (best_end != std::string::npos) return trim_copy(trimmed.substr(0, best_end));

  // Hard trim to 40 words.
  std::size_t words = 0;
  bool in_word = false;
  std::size_t end = trimmed.size();
  for (std::size_t i = 0; i < trimmed.size(); ++i) {
    const bool ws = std::isspace(static_cast<unsigned char>(trimmed[i])) != 0;
    if (!ws && !in_word) ++words;
    if (ws && in_word && words == 40) {
      end = i;
      break;
    }
    in_word = !ws;
  }
  std::string cut = trim_copy(trimmed.substr(0, end));
  while (!cut.empty() && (cut.back() == ',' || cut.back() == ';' || cut.back() == ':')) {
    cut.pop_back();
  }
  if (cut.empty()) return "Module description unavailable.";
  if (cut.back() != '.') cut += '.';
  return cut;
}

std::string generate_description(const ModuleRecord& draft, DescriptionClient& client,
                                 DescriptionSource* used) {
  std::optional<std::string> reply = client.describe(draft);
  if (reply && word_count(*reply) > 40 &&
      client.source() == DescriptionSource::ExternalModel) {
    // One regeneration attempt before truncation kicks in.
    if (const auto retry = client.describe(draft)) reply = retry;
  }
  DescriptionSource source = client.source();
  if (!reply) {
    TemplateFallbackClient fallback;
    reply = fallback.describe(draft);
    source = DescriptionSource::TemplateFallback;
  }
  if (used) *used = source;
  return enforce_description_contract(*reply);
}

// ---------------------------------------------------------------------------
// Whole-corpus extraction
// ---------------------------------------------------------------------------

ExtractResult extract_records(const std::vector<SourceFile>& files,
                              DescriptionClient& client) {
  ExtractResult result;
  result.report.stage = Stage::DbValidation;
  result.report.input_count = static_cast<std::int64_t>(files.size());
  for (const SourceFile& f : files) {
    result.report.input_bytes += static_cast<std::int64_t>(f.content.size());
  }

  for (const SourceFile& file : files) {
    const std::string text = file.text();
    std::vector<std::string> issues;
    const std::vector<ModuleRegion> regions = find_modules(text, &issues);
    for (const std::string& issue : issues) {
      result.report.rejections.push_back({file.path, issue});
    }
    if (regions.empty()) {
      if (issues.empty()) {
        result.report.rejections.push_back({file.path, "NoModuleFound"});
      }
      continue;
    }

    for (const ModuleRegion& region : regions) {
      const std::string module_text = text.substr(region.begin, region.end - region.begin);
      const std::string key = file.path + ":" + region.name;

      ModuleRecord record;
      record.module_name = region.name;
      record.verilog_code = module_text;
      try {
        record.ports = parse_ports(module_text, collect_parameters(module_text));
      } catch (const PortListError& e) {
        result.report.rejections.push_back(
            {key, std::string("UnparseablePortList: ") + e.what()});
        continue;
      }
      record.comments = extract_comments(module_text);
      record.token_count = estimate_tokens(module_text);
      record.description =
          generate_description(record, client, &record.description_source);

      const std::vector<std::string> violations = validate_record(record);
      if (!violations.empty()) {
        std::string reason = "InvariantViolation: " + violations.front();
        result.report.rejections.push_back({key, reason});
        continue;
      }
      result.records.push_back(std::move(record));
      result.record_sources.push_back(file.path);
    }
  }

  result.report.output_count = static_cast<std::int64_t>(result.records.size());
  for (const ModuleRecord& r : result.records) {
    result.report.output_bytes += static_cast<std::int64_t>(r.verilog_code.size());
  }
  return result;
}

}  // namespace forge
