#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "forge/corpus_model.hpp"

namespace forge {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Modules that legitimately have no ports (fill wrappers, decap cells).
// Configuration, not a rule; names are matched case-insensitively as
// substrings.
struct PortlessExemptions {
  std::vector<std::string> name_substrings{"filler", "decap", "wrapper_empty"};

  bool exempt(std::string_view module_name) const;
};

struct QueryFilter {
  std::optional<std::string> name_pattern;  // substring match
  std::optional<std::pair<std::int64_t, std::int64_t>> token_range;      // inclusive
  std::optional<std::pair<std::int64_t, std::int64_t>> port_count_range; // inclusive
  std::optional<bool> has_comments;
};

// Relational store holding the validated dataset: a module table with a
// unique verilog_code column and a port table with per-module unique port
// names, cascade-deleted with their module. The default engine is embedded
// SQLite so the pipeline is self-contained; a client-server adapter can
// implement the same surface for deployments that need one.
class ModuleStore {
 public:
  // `location` is a filesystem path or ":memory:"; a "sqlite://" prefix is
  // accepted and stripped.
  explicit ModuleStore(const std::string& location);
  ~ModuleStore();
  ModuleStore(const ModuleStore&) = delete;
  ModuleStore& operator=(const ModuleStore&) = delete;

  // Creates both tables with all constraints; idempotent.
  void init_schema();

  struct Inserted {
    long long id;
  };
  struct Rejected {
    std::string reason;
  };
  using InsertOutcome = std::variant<Inserted, Rejected>;

  // The final validation gate. Rejects portless records outside the
  // exemption list, unresolved widths, duplicate port names, duplicate
  // verilog_code, and null-equivalent fields. Atomic: a rejected insert
  // leaves zero rows behind.
  InsertOutcome insert_record(const ModuleRecord& record,
                              const PortlessExemptions& exemptions = {});

  struct StoredRecord {
    long long id = 0;
    ModuleRecord record;
  };

  // Records reconstructed by joining port rows, ordered by id.
  std::vector<StoredRecord> query_modules(const QueryFilter& filter = {}) const;

  long long module_count() const;

  struct ExportCounts {
    long long exported = 0;
  };
  struct ImportCounts {
    long long imported = 0;
    long long rejected = 0;
  };

  // One serialized record per line; import applies the full insert gate.
  ExportCounts export_jsonl(const std::filesystem::path& path) const;
  ImportCounts import_jsonl(const std::filesystem::path& path,
                            const PortlessExemptions& exemptions = {},
                            StageReport* report = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Resolves a store location from an explicit value or FORGE_DB_URL.
std::string resolve_store_location(const std::string& cli_value);

}  // namespace forge
