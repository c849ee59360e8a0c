#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "figlabel/evaluation.hpp"
#include "figlabel/geometry.hpp"
#include "figlabel/labels.hpp"

namespace figlabel {

inline constexpr const char* kSchemaVersion = "1";

// One JSON-lines row of a label dataset. Matches InducedLabel plus a free
// provenance string so detector outputs can share the format.
struct LabelRecord {
  std::string paper_id;
  int page = 0;
  Kind kind = Kind::Figure;
  BBox figure_box;
  std::optional<BBox> caption_box;
  std::optional<std::string> caption_text;
  std::optional<std::string> name;
  double dpi = 100.0;
  int page_width = 0;
  int page_height = 0;
  std::string provenance = "latex";

  bool operator==(const LabelRecord& other) const = default;
};

LabelRecord to_record(const InducedLabel& label);
EvalItem to_eval_item(const LabelRecord& record);

// Fixed-format float: "%.*f" with -0 normalized to 0.
std::string format_fixed(double value, int places);

// One JSON line (without trailing newline); keys in schema order,
// coordinates at 4 decimal places.
std::string serialize_record(const LabelRecord& record);

// Parses one line; throws Error("schema mismatch: ...") on a wrong or
// missing schema_version and Error("malformed record: ...") otherwise.
LabelRecord parse_record(const std::string& line);

std::vector<LabelRecord> read_label_file(const std::filesystem::path& path);

// Writes the complete file through a temp-and-rename so failures never leave
// partial datasets behind.
void write_label_file(const std::filesystem::path& path,
                      std::span<const LabelRecord> records);

// Corpus statistics: per-paper figure/table histograms normalized to
// fractions of papers.
struct CorpusStats {
  long paper_count = 0;
  long figure_count = 0;
  long table_count = 0;
  std::map<long, double> figures_per_paper;
  std::map<long, double> tables_per_paper;
};

CorpusStats compute_stats(std::span<const LabelRecord> records);

std::string stats_to_json(const CorpusStats& stats);
std::string stats_to_table(const CorpusStats& stats);

std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace figlabel
