#include "forge/analytics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "forge/metadata_extract.hpp"
#include "forge/verilog_lex.hpp"

namespace forge {

std::int64_t line_count(std::string_view code) {
  std::int64_t count = 0;
  std::size_t start = 0;
  while (start < code.size()) {
    std::size_t nl = code.find('\n', start);
    if (nl == std::string_view::npos) nl = code.size();
    const std::string_view line = code.substr(start, nl - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) ++count;
    start = nl + 1;
  }
  return count;
}

double comment_density(std::string_view code) {
  if (code.empty()) return 0.0;
  std::size_t comment_chars = 0;
  for (const vlex::CommentSpan& span : vlex::comment_spans(code)) {
    comment_chars += span.end - span.begin;
  }
  if (comment_chars == 0) return 0.0;
  return 100.0 * static_cast<double>(comment_chars) /
         static_cast<double>(code.size());
}

// ---------------------------------------------------------------------------
// Functional taxonomy
// ---------------------------------------------------------------------------

namespace {

ClassRubric rubric_from_json(const nlohmann::json& j) {
  ClassRubric rubric;
  for (const auto& entry : j) {
    ClassRubric::Class cls;
    cls.id = entry.at("id").get<int>();
    cls.name = entry.at("name").get<std::string>();
    for (const auto& kw : entry.at("keywords")) {
      cls.keywords.push_back(kw.get<std::string>());
    }
    rubric.classes.push_back(std::move(cls));
  }
  std::sort(rubric.classes.begin(), rubric.classes.end(),
            [](const ClassRubric::Class& a, const ClassRubric::Class& b) {
              return a.id < b.id;
            });
  return rubric;
}

// Mirror of data/functional_classes.json so the library works without the
// data file; the CLI prefers the file when given one.
constexpr const char* kBuiltinRubricJson = R"json(
[
  {"id": 1, "name": "Basic Digital Building Blocks",
   "keywords": ["multiplexer", "mux", "demultiplexer", "demux", "decoder", "decode",
                "encoder", "adder", "subtractor", "comparator", "parity", "priority",
                "register", "shift", "counter", "flip", "flop", "latch", "johnson",
                "ring", "siso", "sipo", "piso", "pipo"]},
  {"id": 2, "name": "Combinational Logic Designs",
   "keywords": ["alu", "logic gate", "barrel", "shifter", "carry lookahead", "booth",
                "wallace", "multiplier", "gray", "bit-slice", "xor", "xnor", "nand",
                "nor gate", "converter"]},
  {"id": 3, "name": "Sequential Logic Designs",
   "keywords": ["fsm", "state machine", "moore", "mealy", "pipeline", "pipelined",
                "clock divider", "timer", "watchdog", "register file",
                "sequence detector", "pulse", "edge detector", "stretcher"]},
  {"id": 4, "name": "Memory Components",
   "keywords": ["sram", "dram", "memory", "rom", "eeprom", "fifo", "ram", "cam",
                "cache", "dual-port", "page table", "lpddr", "ddr"]},
  {"id": 5, "name": "Communication Interfaces",
   "keywords": ["uart", "spi", "i2c", "usb", "pcie", "axi", "ahb", "apb", "dma",
                "ethernet", "mac", "phy", "jtag", "bridge", "interconnect", "tap"]},
  {"id": 6, "name": "Security and Crypto Blocks",
   "keywords": ["aes", "rsa", "sha", "hmac", "trng", "prng", "random", "crypto",
                "cipher", "encrypt", "decrypt", "secure", "key management",
                "access control", "debug lock"]},
  {"id": 7, "name": "SoC Integration Components",
   "keywords": ["arbiter", "crossbar", "address decoder", "interrupt", "plic",
                "reset controller", "cdc", "synchronizer", "power management",
                "boot rom", "system control"]},
  {"id": 8, "name": "Processor and Core Subsystems",
   "keywords": ["risc", "cpu", "processor", "core", "microcode", "fetch",
                "decode unit", "rename", "reorder", "branch", "tlb", "mmu",
                "return address stack"]},
  {"id": 9, "name": "Peripheral Interfaces",
   "keywords": ["gpio", "pwm", "adc", "dac", "touchscreen", "camera", "mipi", "hdmi",
                "vga", "lvds", "sd card", "mmc", "audio", "i2s", "codec", "display"]},
  {"id": 10, "name": "Verification-Only Designs",
   "keywords": ["testbench", "coverage", "scoreboard", "bfm", "bus functional",
                "monitor", "checker", "reference model", "protocol compliance"]},
  {"id": 11, "name": "Custom Accelerators and IP Blocks",
   "keywords": ["accelerator", "matrix", "softmax", "activation", "dsp", "fir", "iir",
                "fft", "dct", "video", "h264", "h265", "neural", "inference", "jpeg",
                "sorting", "crc", "scheduler", "filter"]},
  {"id": 12, "name": "Clock and Power Management Units",
   "keywords": ["clock gating", "pll", "dll", "frequency divider", "dvfs",
                "power gating", "wakeup", "retention", "clock mux", "voltage"]},
  {"id": 13, "name": "Error Handling and Fault Tolerance Modules",
   "keywords": ["ecc", "secded", "bch", "reed-solomon", "tmr", "redundancy", "fault",
                "error", "parity checker", "error logging", "watchdog timer"]}
]
)json";

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Boundary-aware keyword match on lowercased text; a keyword edge that is
// itself non-alphanumeric supplies its own boundary, and suffix characters
// after the keyword are tolerated ("decode" matches "decodes").
bool keyword_matches(const std::string& text, const std::string& keyword) {
  std::size_t pos = 0;
  while ((pos = text.find(keyword, pos)) != std::string::npos) {
    const bool left_ok =
        pos == 0 || !is_alnum(text[pos - 1]) || !is_alnum(keyword.front());
    if (left_ok) return true;
    ++pos;
  }
  return false;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

const ClassRubric& ClassRubric::builtin() {
  static const ClassRubric rubric =
      rubric_from_json(nlohmann::json::parse(kBuiltinRubricJson));
  return rubric;
}

ClassRubric ClassRubric::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rubric file: " + path.string());
  nlohmann::json j;
  in >> j;
  return rubric_from_json(j);
}

int classify_module(const ModuleRecord& record, const ClassRubric& rubric,
                    ClassificationClient* client) {
  if (client != nullptr) {
    if (const auto id = client->classify(record, rubric)) {
      if (*id >= 1 && *id <= static_cast<int>(rubric.classes.size())) return *id;
    }
  }
  const std::string text =
      to_lower(record.module_name) + " " + to_lower(record.description);
  int best_id = rubric.classes.empty() ? 1 : rubric.classes.front().id;
  int best_score = 0;
  for (const ClassRubric::Class& cls : rubric.classes) {
    int score = 0;
    for (const std::string& keyword : cls.keywords) {
      if (keyword_matches(text, to_lower(keyword))) ++score;
    }
    if (score > best_score) {
      best_score = score;
      best_id = cls.id;
    }
  }
  return best_id;
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

std::size_t density_bucket_index(double density) {
  for (std::size_t i = 0; i < kDensityBucketEdges.size(); ++i) {
    if (density <= kDensityBucketEdges[i]) return i;
  }
  return kDensityBucketCount - 1;  // > 75
}

namespace {

DistributionStats distribution_of(std::vector<std::int64_t> values) {
  DistributionStats stats;
  if (values.empty()) return stats;
  double sum = 0.0;
  for (const std::int64_t v : values) {
    sum += static_cast<double>(v);
    ++stats.histogram[v];
  }
  stats.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  stats.median = values[(values.size() - 1) / 2];
  return stats;
}

}  // namespace

CorpusStats compute_stats(const std::vector<ModuleRecord>& records,
                          const ClassRubric& rubric) {
  CorpusStats stats;
  stats.module_count = static_cast<std::int64_t>(records.size());

  std::vector<std::int64_t> lines;
  std::vector<std::int64_t> tokens;
  std::vector<std::int64_t> ports;
  std::vector<double> densities;
  lines.reserve(records.size());
  tokens.reserve(records.size());
  ports.reserve(records.size());

  for (const ModuleRecord& record : records) {
    lines.push_back(line_count(record.verilog_code));
    tokens.push_back(record.token_count);
    ports.push_back(static_cast<std::int64_t>(record.ports.size()));

    const double density = comment_density(record.verilog_code);
    if (density > 0.0) {
      ++stats.commented_count;
      densities.push_back(density);
      ++stats.density_buckets[density_bucket_index(density)];
    }

    const int cls = classify_module(record, rubric);
    if (cls >= 1 && cls <= static_cast<int>(kClassCount)) {
      ++stats.class_counts[static_cast<std::size_t>(cls - 1)];
    }
  }

  stats.lines = distribution_of(std::move(lines));
  stats.tokens = distribution_of(std::move(tokens));
  stats.ports = distribution_of(std::move(ports));

  if (!densities.empty()) {
    double sum = 0.0;
    for (const double d : densities) sum += d;
    stats.density_mean = sum / static_cast<double>(densities.size());
    std::sort(densities.begin(), densities.end());
    stats.density_median = densities[(densities.size() - 1) / 2];
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string_view stage_description(Stage stage) {
  switch (stage) {
    case Stage::Filter: return "Removes netlist, testbench, and simulation files";
    case Stage::Dedup: return "Removes byte-identical duplicate files";
    case Stage::Syntax: return "Drops files that fail compiler syntax checks";
    case Stage::Synthesis: return "Keeps only files from synthesizable projects";
    case Stage::DbValidation: return "Validates metadata and database constraints";
  }
  return "";
}

namespace {

std::string format_double(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
  return buffer;
}

double bytes_to_mb(std::int64_t bytes) {
  return static_cast<double>(bytes) / 1e6;
}

// Groups detailed rejection strings by their leading phrase so the table's
// "common reasons" column stays readable.
std::string coarse_reason(const std::string& reason) {
  if (reason.rfind("duplicate of ", 0) == 0) return "identical files";
  const std::size_t colon = reason.find(':');
  if (colon != std::string::npos) return reason.substr(0, colon);
  return reason;
}

std::string common_reasons(const StageReport& report, std::size_t limit = 3) {
  std::map<std::string, std::int64_t> counts;
  for (const Rejection& r : report.rejections) ++counts[coarse_reason(r.reason)];
  std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::string out;
  for (std::size_t i = 0; i < ranked.size() && i < limit; ++i) {
    if (i > 0) out += ", ";
    out += ranked[i].first;
  }
  return out.empty() ? "-" : out;
}

}  // namespace

ReportBundle render_report(const CorpusStats* stats,
                           const std::vector<StageReport>& stage_reports) {
  ReportBundle bundle;
  nlohmann::ordered_json report;

  // Stage table.
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  std::string table;
  {
    char header[256];
    std::snprintf(header, sizeof header, "%-14s %-48s %12s %12s %12s  %s\n", "Stage",
                  "Description", "Input (MB)", "Output (MB)", "% Retained",
                  "Common Rejection Reasons");
    table += header;
    table += std::string(130, '-') + "\n";
  }
  for (const StageReport& sr : stage_reports) {
    nlohmann::ordered_json row;
    row["stage"] = std::string(stage_to_string(sr.stage));
    row["description"] = std::string(stage_description(sr.stage));
    row["input_count"] = sr.input_count;
    row["output_count"] = sr.output_count;
    row["input_bytes"] = sr.input_bytes;
    row["output_bytes"] = sr.output_bytes;
    row["input_mb"] = bytes_to_mb(sr.input_bytes);
    row["output_mb"] = bytes_to_mb(sr.output_bytes);
    const auto retention = sr.retention_percent();
    if (retention) {
      row["retained_percent"] = *retention;
    } else {
      row["retained_percent"] = nullptr;
    }
    row["rejection_count"] = static_cast<std::int64_t>(sr.rejections.size());
    row["common_rejection_reasons"] = common_reasons(sr);
    stages.push_back(row);

    char line[512];
    const std::string retained_text =
        retention ? format_double(*retention, 2) + "%" : "n/a";
    std::snprintf(line, sizeof line, "%-14s %-48s %12s %12s %12s  %s\n",
                  std::string(stage_to_string(sr.stage)).c_str(),
                  std::string(stage_description(sr.stage)).c_str(),
                  format_double(bytes_to_mb(sr.input_bytes), 2).c_str(),
                  format_double(bytes_to_mb(sr.output_bytes), 2).c_str(),
                  retained_text.c_str(), common_reasons(sr).c_str());
    table += line;
  }
  report["stages"] = stages;
  bundle.table_text = table;

  // Corpus statistics.
  if (stats != nullptr) {
    nlohmann::ordered_json corpus;
    corpus["module_count"] = stats->module_count;
    auto dist = [](const DistributionStats& d) {
      nlohmann::ordered_json out;
      out["mean"] = d.mean;
      out["median"] = d.median;
      return out;
    };
    corpus["line_count"] = dist(stats->lines);
    corpus["token_count"] = dist(stats->tokens);
    corpus["port_count"] = dist(stats->ports);
    corpus["commented_modules"] = stats->commented_count;
    corpus["comment_density_mean"] = stats->density_mean;
    corpus["comment_density_median"] = stats->density_median;
    nlohmann::ordered_json buckets = nlohmann::ordered_json::array();
    static const char* kBucketLabels[] = {"0-12.5%",    "12.5%-25%", "25%-37.5%",
                                          "37.5%-50%",  "50%-62.5%", "62.5%-75%",
                                          ">75%"};
    for (std::size_t i = 0; i < kDensityBucketCount; ++i) {
      nlohmann::ordered_json b;
      b["bucket"] = kBucketLabels[i];
      b["count"] = stats->density_buckets[i];
      buckets.push_back(b);
    }
    corpus["comment_density_buckets"] = buckets;
    nlohmann::ordered_json classes = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < kClassCount; ++i) {
      nlohmann::ordered_json c;
      c["class_id"] = static_cast<int>(i + 1);
      c["name"] = ClassRubric::builtin().classes[i].name;
      c["count"] = stats->class_counts[i];
      classes.push_back(c);
    }
    corpus["class_counts"] = classes;
    report["corpus"] = corpus;

    auto hist_csv = [](const DistributionStats& d) {
      std::string csv = "value,count\n";
      for (const auto& [value, count] : d.histogram) {
        csv += std::to_string(value) + "," + std::to_string(count) + "\n";
      }
      return csv;
    };
    bundle.csvs["hist_line_count.csv"] = hist_csv(stats->lines);
    bundle.csvs["hist_token_count.csv"] = hist_csv(stats->tokens);
    bundle.csvs["hist_port_count.csv"] = hist_csv(stats->ports);
    {
      std::string csv = "bucket,count\n";
      for (std::size_t i = 0; i < kDensityBucketCount; ++i) {
        csv += std::string(kBucketLabels[i]) + "," +
               std::to_string(stats->density_buckets[i]) + "\n";
      }
      bundle.csvs["hist_comment_density.csv"] = csv;
    }
    {
      std::string csv = "class_id,name,count\n";
      for (std::size_t i = 0; i < kClassCount; ++i) {
        csv += std::to_string(i + 1) + "," + ClassRubric::builtin().classes[i].name +
               "," + std::to_string(stats->class_counts[i]) + "\n";
      }
      bundle.csvs["hist_class.csv"] = csv;
    }
  }

  bundle.report_json = report.dump(2) + "\n";
  return bundle;
}

}  // namespace forge
