#include "forge/persistence.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <sqlite3.h>

namespace forge {

bool PortlessExemptions::exempt(std::string_view module_name) const {
  std::string lower(module_name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (const std::string& marker : name_substrings) {
    std::string m = marker;
    std::transform(m.begin(), m.end(), m.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (!m.empty() && lower.find(m) != std::string::npos) return true;
  }
  return false;
}

namespace {

constexpr const char* kSchemaSql = R"sql(
CREATE TABLE IF NOT EXISTS verilog_modules (
    id INTEGER PRIMARY KEY,
    module_name TEXT NOT NULL,
    verilog_code TEXT NOT NULL UNIQUE,
    description TEXT NOT NULL,
    comments TEXT,
    token_count INTEGER,
    extracted_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
);
CREATE TABLE IF NOT EXISTS module_ports (
    id INTEGER PRIMARY KEY,
    module_id INTEGER NOT NULL REFERENCES verilog_modules(id) ON DELETE CASCADE,
    port_name TEXT NOT NULL,
    port_type TEXT NOT NULL CHECK (port_type IN ('input', 'output', 'inout')),
    port_width INTEGER,
    CONSTRAINT unique_port UNIQUE (module_id, port_name)
);
)sql";

// Cursor-style wrapper so statements are always finalized.
class Stmt {
 public:
  Stmt(sqlite3* db, const std::string& sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
      throw StoreError(std::string("prepare failed: ") + sqlite3_errmsg(db));
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  void bind_text(int index, const std::string& value) {
    check(sqlite3_bind_text(stmt_, index, value.data(),
                            static_cast<int>(value.size()), SQLITE_TRANSIENT));
  }
  void bind_int64(int index, std::int64_t value) {
    check(sqlite3_bind_int64(stmt_, index, value));
  }
  void bind_null(int index) { check(sqlite3_bind_null(stmt_, index)); }

  int step() {
    const int rc = sqlite3_step(stmt_);
    if (rc != SQLITE_ROW && rc != SQLITE_DONE) {
      throw StoreError(std::string("step failed: ") + sqlite3_errmsg(db_));
    }
    return rc;
  }
  // Like step() but reports constraint violations instead of throwing.
  int step_allow_constraint(bool* constraint_violated) {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW || rc == SQLITE_DONE) {
      *constraint_violated = false;
      return rc;
    }
    if ((rc & 0xFF) == SQLITE_CONSTRAINT) {
      *constraint_violated = true;
      return rc;
    }
    throw StoreError(std::string("step failed: ") + sqlite3_errmsg(db_));
  }

  std::int64_t column_int64(int col) { return sqlite3_column_int64(stmt_, col); }
  bool column_is_null(int col) {
    return sqlite3_column_type(stmt_, col) == SQLITE_NULL;
  }
  std::string column_text(int col) {
    const unsigned char* text = sqlite3_column_text(stmt_, col);
    const int size = sqlite3_column_bytes(stmt_, col);
    return text == nullptr ? std::string()
                           : std::string(reinterpret_cast<const char*>(text),
                                         static_cast<std::size_t>(size));
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) {
      throw StoreError(std::string("bind failed: ") + sqlite3_errmsg(db_));
    }
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

std::vector<std::string> split_joined_comments(const std::string& joined) {
  std::vector<std::string> comments;
  std::size_t start = 0;
  while (start < joined.size()) {
    std::size_t nl = joined.find('\n', start);
    if (nl == std::string::npos) nl = joined.size();
    if (nl > start) comments.push_back(joined.substr(start, nl - start));
    start = nl + 1;
  }
  return comments;
}

}  // namespace

struct ModuleStore::Impl {
  sqlite3* db = nullptr;

  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string message = err != nullptr ? err : "unknown sqlite error";
      sqlite3_free(err);
      throw StoreError("StoreUnavailable: " + message);
    }
  }
};

ModuleStore::ModuleStore(const std::string& location) : impl_(std::make_unique<Impl>()) {
  std::string path = location;
  if (path.rfind("sqlite://", 0) == 0) path = path.substr(9);
  if (path.empty()) throw StoreError("StoreUnavailable: empty store location");
  if (sqlite3_open_v2(path.c_str(), &impl_->db,
                      SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) !=
      SQLITE_OK) {
    const std::string message =
        impl_->db != nullptr ? sqlite3_errmsg(impl_->db) : "cannot open";
    if (impl_->db != nullptr) sqlite3_close(impl_->db);
    impl_->db = nullptr;
    throw StoreError("StoreUnavailable: " + message + " (" + path + ")");
  }
  sqlite3_busy_timeout(impl_->db, 10000);
  impl_->exec("PRAGMA foreign_keys = ON;");
}

ModuleStore::~ModuleStore() {
  if (impl_ && impl_->db != nullptr) sqlite3_close(impl_->db);
}

void ModuleStore::init_schema() { impl_->exec(kSchemaSql); }

ModuleStore::InsertOutcome ModuleStore::insert_record(
    const ModuleRecord& record, const PortlessExemptions& exemptions) {
  // Validation gates before touching the store.
  if (record.module_name.empty()) return Rejected{"null module_name"};
  if (record.verilog_code.empty()) return Rejected{"null verilog_code"};
  if (record.description.empty()) return Rejected{"null description"};
  if (record.ports.empty() && !exemptions.exempt(record.module_name)) {
    return Rejected{"portless module not on the exemption list"};
  }
  std::set<std::string> seen_names;
  for (const PortSpec& port : record.ports) {
    if (!port.bit_width.is_resolved()) {
      return Rejected{"unresolved port width for '" + port.name + "'"};
    }
    if (!seen_names.insert(port.name).second) {
      return Rejected{"duplicate port name '" + port.name + "'"};
    }
  }

  std::string comments_joined;
  for (std::size_t i = 0; i < record.comments.size(); ++i) {
    if (i > 0) comments_joined += '\n';
    comments_joined += record.comments[i];
  }

  impl_->exec("BEGIN IMMEDIATE;");
  try {
    long long module_id = 0;
    {
      Stmt stmt(impl_->db,
                "INSERT INTO verilog_modules (module_name, verilog_code, description, "
                "comments, token_count) VALUES (?, ?, ?, ?, ?);");
      stmt.bind_text(1, record.module_name);
      stmt.bind_text(2, record.verilog_code);
      stmt.bind_text(3, record.description);
      if (record.comments.empty()) {
        stmt.bind_null(4);
      } else {
        stmt.bind_text(4, comments_joined);
      }
      stmt.bind_int64(5, record.token_count);
      bool constraint = false;
      stmt.step_allow_constraint(&constraint);
      if (constraint) {
        impl_->exec("ROLLBACK;");
        return Rejected{"duplicate verilog_code"};
      }
      module_id = sqlite3_last_insert_rowid(impl_->db);
    }
    for (const PortSpec& port : record.ports) {
      Stmt stmt(impl_->db,
                "INSERT INTO module_ports (module_id, port_name, port_type, "
                "port_width) VALUES (?, ?, ?, ?);");
      stmt.bind_int64(1, module_id);
      stmt.bind_text(2, port.name);
      stmt.bind_text(3, std::string(port_direction_to_string(port.direction)));
      stmt.bind_int64(4, port.bit_width.width());
      bool constraint = false;
      stmt.step_allow_constraint(&constraint);
      if (constraint) {
        impl_->exec("ROLLBACK;");
        return Rejected{"port constraint violation for '" + port.name + "'"};
      }
    }
    impl_->exec("COMMIT;");
    return Inserted{module_id};
  } catch (...) {
    char* err = nullptr;
    sqlite3_exec(impl_->db, "ROLLBACK;", nullptr, nullptr, &err);
    sqlite3_free(err);
    throw;
  }
}

std::vector<ModuleStore::StoredRecord> ModuleStore::query_modules(
    const QueryFilter& filter) const {
  std::string sql =
      "SELECT id, module_name, verilog_code, description, comments, token_count "
      "FROM verilog_modules WHERE 1=1";
  if (filter.name_pattern) sql += " AND module_name LIKE ?";
  if (filter.token_range) sql += " AND token_count >= ? AND token_count <= ?";
  if (filter.port_count_range) {
    sql +=
        " AND (SELECT COUNT(*) FROM module_ports p WHERE p.module_id = "
        "verilog_modules.id) BETWEEN ? AND ?";
  }
  if (filter.has_comments) {
    sql += *filter.has_comments ? " AND comments IS NOT NULL AND comments <> ''"
                                : " AND (comments IS NULL OR comments = '')";
  }
  sql += " ORDER BY id;";

  Stmt stmt(impl_->db, sql);
  int index = 1;
  if (filter.name_pattern) stmt.bind_text(index++, "%" + *filter.name_pattern + "%");
  if (filter.token_range) {
    stmt.bind_int64(index++, filter.token_range->first);
    stmt.bind_int64(index++, filter.token_range->second);
  }
  if (filter.port_count_range) {
    stmt.bind_int64(index++, filter.port_count_range->first);
    stmt.bind_int64(index++, filter.port_count_range->second);
  }

  std::vector<StoredRecord> records;
  while (stmt.step() == SQLITE_ROW) {
    StoredRecord stored;
    stored.id = stmt.column_int64(0);
    stored.record.module_name = stmt.column_text(1);
    stored.record.verilog_code = stmt.column_text(2);
    stored.record.description = stmt.column_text(3);
    if (!stmt.column_is_null(4)) {
      stored.record.comments = split_joined_comments(stmt.column_text(4));
    }
    stored.record.token_count = stmt.column_int64(5);
    records.push_back(std::move(stored));
  }

  for (StoredRecord& stored : records) {
    Stmt ports(impl_->db,
               "SELECT port_name, port_type, port_width FROM module_ports "
               "WHERE module_id = ? ORDER BY id;");
    ports.bind_int64(1, stored.id);
    while (ports.step() == SQLITE_ROW) {
      PortSpec port;
      port.name = ports.column_text(0);
      const auto dir = port_direction_from_string(ports.column_text(1));
      port.direction = dir.value_or(PortDirection::Input);
      port.bit_width = ports.column_is_null(2)
                           ? BitWidth::unresolved("")
                           : BitWidth::resolved(static_cast<int>(ports.column_int64(2)));
      stored.record.ports.push_back(std::move(port));
    }
  }
  return records;
}

long long ModuleStore::module_count() const {
  Stmt stmt(impl_->db, "SELECT COUNT(*) FROM verilog_modules;");
  stmt.step();
  return stmt.column_int64(0);
}

ModuleStore::ExportCounts ModuleStore::export_jsonl(
    const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreError("IoError: cannot open " + path.string());
  ExportCounts counts;
  for (const StoredRecord& stored : query_modules()) {
    out << serialize_record(stored.record) << '\n';
    ++counts.exported;
  }
  if (!out) throw StoreError("IoError: write failed for " + path.string());
  return counts;
}

ModuleStore::ImportCounts ModuleStore::import_jsonl(
    const std::filesystem::path& path, const PortlessExemptions& exemptions,
    StageReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("IoError: cannot open " + path.string());
  ImportCounts counts;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    try {
      const ModuleRecord record = deserialize_record(line);
      const InsertOutcome outcome = insert_record(record, exemptions);
      if (std::holds_alternative<Inserted>(outcome)) {
        ++counts.imported;
      } else {
        ++counts.rejected;
        if (report) report->rejections.push_back({where, std::get<Rejected>(outcome).reason});
      }
    } catch (const RecordError& e) {
      ++counts.rejected;
      if (report) report->rejections.push_back({where, e.detail()});
    }
  }
  return counts;
}

std::string resolve_store_location(const std::string& cli_value) {
  if (!cli_value.empty()) return cli_value;
  if (const char* env = std::getenv("FORGE_DB_URL"); env != nullptr && *env != '\0') {
    return env;
  }
  return "forge.db";
}

}  // namespace forge
