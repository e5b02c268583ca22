#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "forge/config.hpp"

using namespace forge;

TEST_CASE("parses sections, scalars, and arrays") {
  const auto cfg = ConfigFile::parse(R"(
# pipeline settings
[pipeline]
root = "corpus"   # inline comment
jobs = 4
resume = true

[filter]
path_excludes = ["sim", "waveform", "_test"]
)");
  CHECK(cfg.get_string("pipeline", "root") == "corpus");
  CHECK(cfg.get_int("pipeline", "jobs") == 4);
  CHECK(cfg.get_bool("pipeline", "resume") == true);
  CHECK(cfg.get_string_list("filter", "path_excludes") ==
        std::vector<std::string>{"sim", "waveform", "_test"});
}

TEST_CASE("missing keys fall back to defaults") {
  const auto cfg = ConfigFile::parse("[a]\nx = 1\n");
  CHECK_FALSE(cfg.has("a", "y"));
  CHECK(cfg.get_string("a", "y", "dflt") == "dflt");
  CHECK(cfg.get_int("b", "z", 9) == 9);
}

TEST_CASE("string escapes work") {
  const auto cfg = ConfigFile::parse(R"([s]
path = "a\\b"
note = "line\nbreak"
)");
  CHECK(cfg.get_string("s", "path") == "a\\b");
  CHECK(cfg.get_string("s", "note") == "line\nbreak");
}

TEST_CASE("hash inside a string is not a comment") {
  const auto cfg = ConfigFile::parse("[s]\nv = \"a#b\"\n");
  CHECK(cfg.get_string("s", "v") == "a#b");
}

TEST_CASE("type mismatches and syntax errors raise ConfigError") {
  const auto cfg = ConfigFile::parse("[a]\nx = 1\n");
  CHECK_THROWS_AS(cfg.get_string("a", "x"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[a\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[a]\nx 1\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[a]\nx = \"unterminated\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[a]\nx = [1, 2]\n"), ConfigError);
}

TEST_CASE("keys without a section live in the empty section") {
  const auto cfg = ConfigFile::parse("top = \"v\"\n[s]\nk = \"w\"\n");
  CHECK(cfg.get_string("", "top") == "v");
  CHECK(cfg.get_string("s", "k") == "w");
}

TEST_CASE("single string promotes to a one-element list") {
  const auto cfg = ConfigFile::parse("[f]\nonly = \"x\"\n");
  CHECK(cfg.get_string_list("f", "only") == std::vector<std::string>{"x"});
}
