#include "forge/config.hpp"

#include <cctype>
#include <fstream>

namespace forge {

namespace {

std::string_view trim(std::string_view s) {
  const std::size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const std::size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Strips a trailing # comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string parse_quoted(std::string_view text, std::size_t& pos) {
  if (pos >= text.size() || text[pos] != '"')
    throw ConfigError("expected quoted string");
  std::string out;
  ++pos;
  while (pos < text.size() && text[pos] != '"') {
    if (text[pos] == '\\' && pos + 1 < text.size()) {
      ++pos;
      switch (text[pos]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        default: out += text[pos]; break;
      }
    } else {
      out += text[pos];
    }
    ++pos;
  }
  if (pos >= text.size()) throw ConfigError("unterminated string");
  ++pos;  // closing quote
  return out;
}

ConfigFile::Value parse_value(std::string_view raw) {
  std::string_view v = trim(raw);
  if (v.empty()) throw ConfigError("empty value");
  if (v.front() == '"') {
    std::size_t pos = 0;
    std::string s = parse_quoted(v, pos);
    if (!trim(v.substr(pos)).empty()) throw ConfigError("trailing text after string");
    return s;
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unterminated array");
    std::vector<std::string> items;
    std::size_t pos = 1;
    while (true) {
      while (pos < v.size() - 1 &&
             std::isspace(static_cast<unsigned char>(v[pos])))
        ++pos;
      if (pos >= v.size() - 1) break;
      if (v[pos] == ',') { ++pos; continue; }
      items.push_back(parse_quoted(v, pos));
    }
    return items;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  const std::string text(v);
  std::size_t used = 0;
  try {
    const long long n = std::stoll(text, &used);
    if (used == text.size()) return n;
  } catch (const std::exception&) {
  }
  throw ConfigError("cannot parse value: " + text);
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    std::string_view line = trim(strip_comment(text.substr(start, nl - start)));
    start = nl + 1;
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    try {
      cfg.values_[section + "." + key] = parse_value(line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (nl == text.size()) break;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse(text);
}

const ConfigFile::Value* ConfigFile::find(std::string_view section,
                                          std::string_view key) const {
  const std::string full = std::string(section) + "." + std::string(key);
  const auto it = values_.find(full);
  return it == values_.end() ? nullptr : &it->second;
}

bool ConfigFile::has(std::string_view section, std::string_view key) const {
  return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(std::string_view section, std::string_view key,
                                   std::string fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  throw ConfigError("config key " + std::string(section) + "." + std::string(key) +
                    " is not a string");
}

long long ConfigFile::get_int(std::string_view section, std::string_view key,
                              long long fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (const auto* n = std::get_if<long long>(v)) return *n;
  throw ConfigError("config key " + std::string(section) + "." + std::string(key) +
                    " is not an integer");
}

bool ConfigFile::get_bool(std::string_view section, std::string_view key,
                          bool fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  throw ConfigError("config key " + std::string(section) + "." + std::string(key) +
                    " is not a boolean");
}

std::vector<std::string> ConfigFile::get_string_list(std::string_view section,
                                                     std::string_view key) const {
  const Value* v = find(section, key);
  if (!v) return {};
  if (const auto* list = std::get_if<std::vector<std::string>>(v)) return *list;
  if (const auto* s = std::get_if<std::string>(v)) return {*s};
  throw ConfigError("config key " + std::string(section) + "." + std::string(key) +
                    " is not a string list");
}

}  // namespace forge
