#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "forge/verilog_lex.hpp"

using namespace forge;

TEST_CASE("regions cover the whole input in order") {
  const std::string src = "a /* b */ c // d\ne \"f//g\" h";
  const auto regions = vlex::scan_regions(src);
  std::size_t cursor = 0;
  for (const auto& r : regions) {
    CHECK(r.begin == cursor);
    CHECK(r.end > r.begin);
    cursor = r.end;
  }
  CHECK(cursor == src.size());
}

TEST_CASE("line and block comments are recognized") {
  const auto spans = vlex::comment_spans("x // one\ny /* two */ z");
  REQUIRE(spans.size() == 2);
  CHECK_FALSE(spans[0].block);
  CHECK(spans[1].block);
}

TEST_CASE("comment-like text inside strings is not a comment") {
  const auto spans = vlex::comment_spans("a = \"// not a comment\"; // real");
  REQUIRE(spans.size() == 1);
  CHECK_FALSE(spans[0].block);
}

TEST_CASE("unterminated block comment runs to end of input") {
  const auto spans = vlex::comment_spans("x /* never closed");
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].end == std::string("x /* never closed").size());
}

TEST_CASE("unterminated string ends at the newline") {
  const std::string src = "a = \"oops\nb = 1;";
  const auto regions = vlex::scan_regions(src);
  bool found_string = false;
  for (const auto& r : regions) {
    if (r.kind == vlex::RegionKind::String) {
      found_string = true;
      CHECK(src[r.end] == '\n');
    }
  }
  CHECK(found_string);
}

TEST_CASE("mask_comments blanks comments but keeps strings and newlines") {
  const std::string src = "a // c\n\"s\" b";
  const std::string masked = vlex::mask_comments(src);
  CHECK(masked.size() == src.size());
  CHECK(masked.find("c") == std::string::npos);
  CHECK(masked.find("\"s\"") != std::string::npos);
  CHECK(masked.find('\n') != std::string::npos);
}

TEST_CASE("mask_non_code blanks strings too") {
  const std::string masked = vlex::mask_non_code("x \"str\" /* y */");
  CHECK(masked.find("str") == std::string::npos);
  CHECK(masked.find('x') != std::string::npos);
}

TEST_CASE("clean_comment_text strips delimiters and trims") {
  const std::string src = "/*  hello  */ // tail  ";
  const auto spans = vlex::comment_spans(src);
  REQUIRE(spans.size() == 2);
  CHECK(vlex::clean_comment_text(src, spans[0]) == "hello");
  CHECK(vlex::clean_comment_text(src, spans[1]) == "tail");
}

TEST_CASE("contains_word respects identifier boundaries") {
  CHECK(vlex::contains_word("posedge clk", "posedge"));
  CHECK(vlex::contains_word("(posedge)", "posedge"));
  CHECK_FALSE(vlex::contains_word("myposedge", "posedge"));
  CHECK_FALSE(vlex::contains_word("posedges", "posedge"));
  CHECK_FALSE(vlex::contains_word("", "x"));
}
