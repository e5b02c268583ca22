#include "forge/verilog_lex.hpp"

#include <cctype>

namespace forge::vlex {

std::vector<Region> scan_regions(std::string_view src) {
  std::vector<Region> regions;
  std::size_t i = 0;
  std::size_t code_start = 0;

  auto flush_code = [&](std::size_t upto) {
    if (upto > code_start) regions.push_back({RegionKind::Code, code_start, upto});
  };

  while (i < src.size()) {
    const char c = src[i];
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      flush_code(i);
      std::size_t end = src.find('\n', i);
      end = (end == std::string_view::npos) ? src.size() : end;  // newline stays code
      regions.push_back({RegionKind::LineComment, i, end});
      i = code_start = end;
    } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      flush_code(i);
      std::size_t end = src.find("*/", i + 2);
      end = (end == std::string_view::npos) ? src.size() : end + 2;
      regions.push_back({RegionKind::BlockComment, i, end});
      i = code_start = end;
    } else if (c == '"') {
      flush_code(i);
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') {
        if (src[j] == '\\' && j + 1 < src.size()) ++j;
        ++j;
      }
      const std::size_t end = (j < src.size() && src[j] == '"') ? j + 1 : j;
      regions.push_back({RegionKind::String, i, end});
      i = code_start = end;
    } else {
      ++i;
    }
  }
  flush_code(src.size());
  return regions;
}

namespace {

std::string mask(std::string_view src, char fill, bool strings_too) {
  std::string out(src);
  for (const Region& r : scan_regions(src)) {
    const bool blank = r.kind == RegionKind::LineComment ||
                       r.kind == RegionKind::BlockComment ||
                       (strings_too && r.kind == RegionKind::String);
    if (!blank) continue;
    for (std::size_t i = r.begin; i < r.end; ++i) {
      if (out[i] != '\n') out[i] = fill;
    }
  }
  return out;
}

}  // namespace

std::string mask_non_code(std::string_view src, char fill) {
  return mask(src, fill, true);
}

std::string mask_comments(std::string_view src, char fill) {
  return mask(src, fill, false);
}

std::vector<CommentSpan> comment_spans(std::string_view src) {
  std::vector<CommentSpan> spans;
  for (const Region& r : scan_regions(src)) {
    if (r.kind == RegionKind::LineComment) {
      spans.push_back({r.begin, r.end, false});
    } else if (r.kind == RegionKind::BlockComment) {
      spans.push_back({r.begin, r.end, true});
    }
  }
  return spans;
}

std::string clean_comment_text(std::string_view src, const CommentSpan& span) {
  std::size_t begin = span.begin + 2;  // skip "//" or "/*"
  std::size_t end = span.end;
  if (span.block && end >= span.begin + 4 &&
      src.substr(end - 2, 2) == "*/") {
    end -= 2;
  }
  std::string_view body = src.substr(begin, end > begin ? end - begin : 0);
  const std::size_t first = body.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return "";
  const std::size_t last = body.find_last_not_of(" \t\r\n");
  return std::string(body.substr(first, last - first + 1));
}

bool is_identifier_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool contains_word(std::string_view code, std::string_view word) {
  if (word.empty()) return false;
  std::size_t pos = 0;
  while ((pos = code.find(word, pos)) != std::string_view::npos) {
    const bool left_ok = pos == 0 || !is_identifier_char(code[pos - 1]);
    const std::size_t after = pos + word.size();
    const bool right_ok = after >= code.size() || !is_identifier_char(code[after]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

}  // namespace forge::vlex
