#include "forge/ingest_filter.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "forge/config.hpp"
#include "forge/verilog_lex.hpp"

namespace forge {

namespace {

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool ends_with_ci(std::string_view text, std::string_view suffix) {
  if (suffix.size() > text.size()) return false;
  return to_lower(text.substr(text.size() - suffix.size())) == to_lower(suffix);
}

std::vector<std::string_view> path_segments(std::string_view path) {
  std::vector<std::string_view> segments;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t slash = path.find('/', start);
    if (slash == std::string_view::npos) slash = path.size();
    if (slash > start) segments.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return segments;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

bool matches_path_keyword(std::string_view segment, std::string_view keyword) {
  if (keyword.empty()) return false;
  const std::string seg = to_lower(segment);
  const std::string kw = to_lower(keyword);
  std::size_t pos = 0;
  while ((pos = seg.find(kw, pos)) != std::string::npos) {
    const bool left_ok =
        pos == 0 || !is_word_char(seg[pos - 1]) || !is_word_char(kw.front());
    const std::size_t after = pos + kw.size();
    const bool right_ok =
        after >= seg.size() || !is_word_char(seg[after]) || !is_word_char(kw.back());
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

FilterDecision filter_file(const SourceFile& file, const FilterConfig& config) {
  for (const std::string& suffix : config.suffix_excludes) {
    if (ends_with_ci(file.path, suffix)) {
      return {false, "suffix " + suffix, ""};
    }
  }

  for (std::string_view segment : path_segments(file.path)) {
    for (const std::string& kw : config.path_excludes) {
      if (matches_path_keyword(segment, kw)) {
        return {false, "path keyword " + kw, ""};
      }
    }
    for (const std::string& kw : config.testbench_markers) {
      if (matches_path_keyword(segment, kw)) {
        return {false, "path keyword " + kw, ""};
      }
    }
  }

  // Content rules run on comment-stripped text so `// $display` never fires.
  const std::string stripped = vlex::mask_comments(file.text());
  bool initial_flag = false;
  for (const std::string& marker : config.content_excludes) {
    if (marker == "initial") {
      // Synthesizable ROM/register init legally uses `initial`; flag only
      // and let the synthesis stage decide.
      if (vlex::contains_word(stripped, "initial")) initial_flag = true;
      continue;
    }
    if (stripped.find(marker) != std::string::npos) {
      return {false, "content " + marker, ""};
    }
  }

  FilterDecision decision;
  if (initial_flag) decision.annotation = "content initial (heuristic)";
  return decision;
}

namespace {

bool is_verilog_source(const std::filesystem::path& p) {
  return p.extension() == ".v";
}

std::string read_file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

ScanResult scan_projects(const std::filesystem::path& root,
                         const FilterConfig& config, const Origin& origin) {
  ScanResult result;
  result.report.stage = Stage::Filter;

  if (!std::filesystem::exists(root)) {
    throw std::runtime_error("scan root does not exist: " + root.string());
  }

  // Candidate paths first, then a canonical sort, so results do not depend
  // on directory iteration order.
  struct Candidate {
    std::string rel_path;  // includes the project directory segment
    std::string project_id;
    std::filesystem::path abs_path;
  };
  std::vector<Candidate> candidates;

  for (const auto& child : std::filesystem::directory_iterator(root)) {
    if (!child.is_directory()) continue;
    const std::string project_id = child.path().filename().generic_string();
    std::error_code ec;
    std::filesystem::recursive_directory_iterator it(child.path(), ec), end;
    if (ec) {
      result.report.rejections.push_back({project_id, "IoError: " + ec.message()});
      continue;
    }
    for (; it != end; it.increment(ec)) {
      if (ec) {
        result.report.rejections.push_back({project_id, "IoError: " + ec.message()});
        break;
      }
      if (!it->is_regular_file() || !is_verilog_source(it->path())) continue;
      const std::string rel =
          std::filesystem::relative(it->path(), root).generic_string();
      candidates.push_back({rel, project_id, it->path()});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.rel_path < b.rel_path; });

  std::map<std::string, ProjectUnit> projects;
  for (const Candidate& c : candidates) {
    SourceFile file;
    file.path = c.rel_path;
    file.origin = origin;
    file.project_id = c.project_id;
    try {
      file.content = read_file_bytes(c.abs_path);
    } catch (const std::exception& e) {
      result.report.rejections.push_back({c.rel_path, std::string("IoError: ") + e.what()});
      ++result.report.input_count;
      continue;
    }
    ++result.report.input_count;
    result.report.input_bytes += static_cast<std::int64_t>(file.content.size());

    const FilterDecision decision = filter_file(file, config);
    if (!decision.annotation.empty()) {
      result.report.annotations.push_back({file.path, decision.annotation});
    }
    if (!decision.keep) {
      result.report.rejections.push_back({file.path, decision.reason});
      continue;
    }
    ++result.report.output_count;
    result.report.output_bytes += static_cast<std::int64_t>(file.content.size());

    auto [it, inserted] = projects.try_emplace(c.project_id);
    if (inserted) {
      it->second.project_id = c.project_id;
      it->second.root = (root / c.project_id).generic_string();
    }
    it->second.files.push_back(std::move(file));
  }

  for (auto& [id, project] : projects) {
    result.projects.push_back(std::move(project));
  }
  return result;
}

FilterConfig filter_config_from_file(const std::filesystem::path& path) {
  const ConfigFile cfg = ConfigFile::load(path);
  FilterConfig out;
  if (cfg.has("filter", "path_excludes"))
    out.path_excludes = cfg.get_string_list("filter", "path_excludes");
  if (cfg.has("filter", "suffix_excludes"))
    out.suffix_excludes = cfg.get_string_list("filter", "suffix_excludes");
  if (cfg.has("filter", "testbench_markers"))
    out.testbench_markers = cfg.get_string_list("filter", "testbench_markers");
  if (cfg.has("filter", "content_excludes"))
    out.content_excludes = cfg.get_string_list("filter", "content_excludes");
  return out;
}

}  // namespace forge
