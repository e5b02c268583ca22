#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Lightweight region scanner shared by the filter, extraction, and analytics
// stages. It is not a Verilog grammar: it only tells code apart from
// comments and string literals so keyword scans never fire inside either.
namespace forge::vlex {

enum class RegionKind { Code, LineComment, BlockComment, String };

struct Region {
  RegionKind kind;
  std::size_t begin;  // byte offset, inclusive
  std::size_t end;    // byte offset, exclusive
};

// Splits `src` into ordered, disjoint regions covering every byte.
// An unterminated block comment extends to end of input; an unterminated
// string literal ends at the newline (Verilog strings are single-line).
std::vector<Region> scan_regions(std::string_view src);

// Comments and strings blanked with `fill`; newlines kept so offsets and
// line numbers survive. Same length as `src`.
std::string mask_non_code(std::string_view src, char fill = ' ');

// Only comments blanked; string literals kept.
std::string mask_comments(std::string_view src, char fill = ' ');

struct CommentSpan {
  std::size_t begin;  // includes the delimiter
  std::size_t end;
  bool block;         // true for /* */, false for //
};

std::vector<CommentSpan> comment_spans(std::string_view src);

// Comment body with delimiters stripped and surrounding whitespace trimmed.
std::string clean_comment_text(std::string_view src, const CommentSpan& span);

bool is_identifier_char(char c);

// True iff `word` occurs in `code` delimited by non-identifier characters.
bool contains_word(std::string_view code, std::string_view word);

}  // namespace forge::vlex
