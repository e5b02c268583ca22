#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace forge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reader for the TOML-style declarative files this project uses: [section]
// headers, `key = value` lines, values being quoted strings, integers,
// booleans, or arrays of quoted strings, with `#` comments. Deliberately a
// subset; anything fancier is a ConfigError.
class ConfigFile {
 public:
  using Value = std::variant<std::string, long long, bool, std::vector<std::string>>;

  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::filesystem::path& path);

  bool has(std::string_view section, std::string_view key) const;

  std::string get_string(std::string_view section, std::string_view key,
                         std::string fallback = "") const;
  long long get_int(std::string_view section, std::string_view key,
                    long long fallback = 0) const;
  bool get_bool(std::string_view section, std::string_view key,
                bool fallback = false) const;
  std::vector<std::string> get_string_list(std::string_view section,
                                           std::string_view key) const;

 private:
  const Value* find(std::string_view section, std::string_view key) const;
  std::map<std::string, Value, std::less<>> values_;  // "section.key" -> value
};

}  // namespace forge
