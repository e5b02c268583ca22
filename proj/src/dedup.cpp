#include "forge/dedup.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <openssl/evp.h>

#include "json.hpp"

namespace forge {

std::string compute_content_hash(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr ||
      EVP_DigestInit_ex(ctx, EVP_md5(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &digest_len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("MD5 digest computation failed");
  }
  EVP_MD_CTX_free(ctx);

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(digest_len * 2);
  for (unsigned int i = 0; i < digest_len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

namespace {

// Shortest path wins; equal lengths fall back to lexicographic order.
bool survivor_before(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

DedupResult deduplicate(const std::vector<SourceFile>& files, bool verify_bytes) {
  DedupResult result;
  result.report.stage = Stage::Dedup;
  result.report.input_count = static_cast<std::int64_t>(files.size());
  for (const SourceFile& f : files) {
    result.report.input_bytes += static_cast<std::int64_t>(f.content.size());
  }

  std::map<std::string, std::vector<const SourceFile*>> by_digest;
  for (const SourceFile& f : files) {
    by_digest[compute_content_hash(f.content)].push_back(&f);
  }

  struct Group {
    std::string digest;
    std::vector<const SourceFile*> members;
  };
  std::vector<Group> groups;
  for (auto& [digest, members] : by_digest) {
    if (!verify_bytes || members.size() == 1) {
      groups.push_back({digest, std::move(members)});
      continue;
    }
    // Split any hash group whose members do not actually share bytes.
    std::vector<std::vector<const SourceFile*>> buckets;
    for (const SourceFile* f : members) {
      bool placed = false;
      for (auto& bucket : buckets) {
        if (bucket.front()->content == f->content) {
          bucket.push_back(f);
          placed = true;
          break;
        }
      }
      if (!placed) buckets.push_back({f});
    }
    for (auto& bucket : buckets) groups.push_back({digest, std::move(bucket)});
  }

  struct Removal {
    std::string path;
    std::string survivor;
  };
  std::vector<Removal> removals;
  std::vector<const SourceFile*> survivors;
  for (Group& group : groups) {
    std::sort(group.members.begin(), group.members.end(),
              [](const SourceFile* a, const SourceFile* b) {
                return survivor_before(a->path, b->path);
              });
    const SourceFile* kept = group.members.front();
    survivors.push_back(kept);
    HashGroup hg;
    hg.digest = group.digest;
    for (const SourceFile* f : group.members) hg.members.push_back(f->path);
    std::sort(hg.members.begin(), hg.members.end());
    result.groups.push_back(std::move(hg));
    for (std::size_t i = 1; i < group.members.size(); ++i) {
      removals.push_back({group.members[i]->path, kept->path});
    }
  }
  std::sort(result.groups.begin(), result.groups.end(),
            [](const HashGroup& a, const HashGroup& b) {
              return a.members.front() < b.members.front();
            });

  std::sort(survivors.begin(), survivors.end(),
            [](const SourceFile* a, const SourceFile* b) { return a->path < b->path; });
  for (const SourceFile* f : survivors) {
    result.survivors.push_back(*f);
    result.report.output_bytes += static_cast<std::int64_t>(f->content.size());
  }
  result.report.output_count = static_cast<std::int64_t>(result.survivors.size());

  std::sort(removals.begin(), removals.end(),
            [](const Removal& a, const Removal& b) { return a.path < b.path; });
  for (const Removal& r : removals) {
    result.report.rejections.push_back({r.path, "duplicate of " + r.survivor});
  }
  return result;
}

std::string dedup_report_json(const DedupResult& result) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  std::map<std::string, const HashGroup*> ordered;
  for (const HashGroup& g : result.groups) ordered[g.digest] = &g;
  for (const auto& [digest, group] : ordered) {
    nlohmann::ordered_json entry;
    // Members are sorted canonically; recompute the survivor by the rule.
    std::string survivor = group->members.front();
    for (const std::string& m : group->members) {
      if (m.size() < survivor.size() || (m.size() == survivor.size() && m < survivor)) {
        survivor = m;
      }
    }
    entry["survivor"] = survivor;
    nlohmann::ordered_json removed = nlohmann::ordered_json::array();
    for (const std::string& m : group->members) {
      if (m != survivor) removed.push_back(m);
    }
    entry["removed"] = removed;
    j[digest] = entry;
  }
  return j.dump(2) + "\n";
}

void write_staging_tree(const std::vector<SourceFile>& files,
                        const std::filesystem::path& out_root,
                        const std::filesystem::path* in_root, StageReport* report) {
  for (const SourceFile& file : files) {
    const std::filesystem::path dest = out_root / file.path;
    try {
      std::filesystem::create_directories(dest.parent_path());
      {
        std::ofstream out(dest, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for write");
        out.write(file.content.data(),
                  static_cast<std::streamsize>(file.content.size()));
        if (!out) throw std::runtime_error("short write");
      }
      if (in_root != nullptr) {
        const std::filesystem::path src = *in_root / file.path;
        std::error_code ec;
        if (std::filesystem::exists(src, ec) && !ec) {
          std::filesystem::permissions(dest, std::filesystem::status(src).permissions(),
                                       ec);
          const auto mtime = std::filesystem::last_write_time(src, ec);
          if (!ec) std::filesystem::last_write_time(dest, mtime, ec);
        }
      }
    } catch (const std::exception& e) {
      if (report != nullptr) {
        report->rejections.push_back({file.path, std::string("IoError: ") + e.what()});
      }
    }
  }
}

}  // namespace forge
