#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus_model.hpp"

namespace forge {

// MD5 of the raw bytes as lowercase hex. MD5 is an identity-grouping key
// here, not a security boundary; byte verification below guards the
// (theoretical) collision case.
std::string compute_content_hash(std::string_view bytes);

struct HashGroup {
  std::string digest;
  std::vector<std::string> members;  // canonically sorted paths, byte-identical

  bool operator==(const HashGroup&) const = default;
};

struct DedupResult {
  std::vector<SourceFile> survivors;  // canonical path order
  std::vector<HashGroup> groups;      // every input file appears in exactly one
  StageReport report;                 // removals as rejections "duplicate of <path>"
};

// One survivor per byte-identical group: the member with the shortest path,
// ties broken lexicographically. When `verify_bytes` is set, groups are
// re-split by full byte comparison before choosing survivors.
DedupResult deduplicate(const std::vector<SourceFile>& files,
                        bool verify_bytes = true);

// Report JSON in the shape {digest: {"survivor": path, "removed": [paths]}}.
std::string dedup_report_json(const DedupResult& result);

// Writes the survivors under `out_root` preserving relative paths, copying
// source permissions and modification time when the staged original at
// `in_root` is available. Copy failures land in `report.rejections` without
// affecting survivor selection.
void write_staging_tree(const std::vector<SourceFile>& files,
                        const std::filesystem::path& out_root,
                        const std::filesystem::path* in_root = nullptr,
                        StageReport* report = nullptr);

}  // namespace forge
