#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/corpus_model.hpp"

namespace forge {

// Non-blank line count of a code block.
std::int64_t line_count(std::string_view code);

// 100 * comment characters (delimiters included) / total characters;
// 0 for comment-free or empty code. Denominator counts every character,
// whitespace and newlines included, so the metric is reproducible.
double comment_density(std::string_view code);

// ---------------------------------------------------------------------------
// Functional taxonomy
// ---------------------------------------------------------------------------

struct ClassRubric {
  struct Class {
    int id = 0;
    std::string name;
    std::vector<std::string> keywords;
  };
  std::vector<Class> classes;

  // Built-in copy of data/functional_classes.json.
  static const ClassRubric& builtin();
  static ClassRubric load(const std::filesystem::path& path);
};

class ClassificationClient {
 public:
  virtual ~ClassificationClient() = default;
  // Class id in [1, 13], or nullopt when unavailable; callers fall back to
  // keyword matching.
  virtual std::optional<int> classify(const ModuleRecord& record,
                                      const ClassRubric& rubric) = 0;
};

// Keyword fallback: boundary-aware matches of each class's vocabulary over
// the lowercased module name and description; most matches wins, ties to
// the lowest class id (which is also the answer when nothing matches).
// Pure: same record, same class, every run.
int classify_module(const ModuleRecord& record,
                    const ClassRubric& rubric = ClassRubric::builtin(),
                    ClassificationClient* client = nullptr);

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

struct DistributionStats {
  double mean = 0.0;
  std::int64_t median = 0;  // lower of the two middles for even n
  std::map<std::int64_t, std::int64_t> histogram;  // value -> count
};

inline constexpr std::array<double, 6> kDensityBucketEdges = {12.5, 25.0, 37.5,
                                                              50.0, 62.5, 75.0};
inline constexpr std::size_t kDensityBucketCount = 7;  // last bucket is >75
inline constexpr std::size_t kClassCount = 13;

struct CorpusStats {
  std::int64_t module_count = 0;
  DistributionStats lines;
  DistributionStats tokens;
  DistributionStats ports;
  std::int64_t commented_count = 0;  // modules with density > 0
  double density_mean = 0.0;         // over commented modules
  double density_median = 0.0;
  std::array<std::int64_t, kDensityBucketCount> density_buckets{};
  std::array<std::int64_t, kClassCount> class_counts{};

  bool operator==(const CorpusStats&) const = default;
};

// Index of the density bucket for a commented module (pre: density > 0).
std::size_t density_bucket_index(double density);

CorpusStats compute_stats(const std::vector<ModuleRecord>& records,
                          const ClassRubric& rubric = ClassRubric::builtin());

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ReportBundle {
  std::string report_json;                   // machine-readable consolidated report
  std::string table_text;                    // stage table, one row per stage
  std::map<std::string, std::string> csvs;   // filename -> CSV body
};

// Stage table plus corpus statistics plus histogram CSVs suitable for
// plotting. Either part may be absent (no stats, or no stage reports).
ReportBundle render_report(const CorpusStats* stats,
                           const std::vector<StageReport>& stage_reports);

std::string_view stage_description(Stage stage);

}  // namespace forge
