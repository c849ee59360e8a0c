#include "figlabel/records.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "figlabel/error.hpp"

namespace figlabel {

std::string to_string(Kind kind) {
  return kind == Kind::Table ? "table" : "figure";
}

Kind kind_from_string(const std::string& s) {
  if (s == "figure") return Kind::Figure;
  if (s == "table") return Kind::Table;
  throw Error("malformed record: unknown kind '" + s + "'");
}

std::string to_string(Provenance p) {
  return p == Provenance::Latex ? "latex" : "xml";
}

LabelRecord to_record(const InducedLabel& label) {
  LabelRecord r;
  r.paper_id = label.paper_id;
  r.page = label.page_index;
  r.kind = label.kind;
  r.figure_box = label.figure_box;
  r.caption_box = label.caption_box;
  r.caption_text = label.caption_text;
  r.name = label.name;
  r.dpi = label.dpi;
  r.page_width = label.page_width;
  r.page_height = label.page_height;
  r.provenance = to_string(label.provenance);
  return r;
}

EvalItem to_eval_item(const LabelRecord& record) {
  return EvalItem{record.kind, record.figure_box, record.caption_box,
                  record.caption_text};
}

std::string format_fixed(double value, int places) {
  if (value == 0.0) value = 0.0;  // collapse -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, value);
  return buf;
}

namespace {

std::string json_string(const std::string& s) {
  return nlohmann::json(s).dump();
}

std::string optional_string(const std::optional<std::string>& s) {
  return s ? json_string(*s) : "null";
}

}  // namespace

std::string serialize_record(const LabelRecord& record) {
  std::ostringstream out;
  out << "{\"schema_version\":\"" << kSchemaVersion << "\""
      << ",\"paper_id\":" << json_string(record.paper_id)
      << ",\"page\":" << record.page
      << ",\"kind\":\"" << to_string(record.kind) << "\""
      << ",\"fig_x1\":" << format_fixed(record.figure_box.x1, 4)
      << ",\"fig_y1\":" << format_fixed(record.figure_box.y1, 4)
      << ",\"fig_x2\":" << format_fixed(record.figure_box.x2, 4)
      << ",\"fig_y2\":" << format_fixed(record.figure_box.y2, 4);
  if (record.caption_box) {
    out << ",\"cap_x1\":" << format_fixed(record.caption_box->x1, 4)
        << ",\"cap_y1\":" << format_fixed(record.caption_box->y1, 4)
        << ",\"cap_x2\":" << format_fixed(record.caption_box->x2, 4)
        << ",\"cap_y2\":" << format_fixed(record.caption_box->y2, 4);
  } else {
    out << ",\"cap_x1\":null,\"cap_y1\":null,\"cap_x2\":null,\"cap_y2\":null";
  }
  out << ",\"caption_text\":" << optional_string(record.caption_text)
      << ",\"name\":" << optional_string(record.name)
      << ",\"dpi\":" << format_fixed(record.dpi, 4)
      << ",\"page_width\":" << record.page_width
      << ",\"page_height\":" << record.page_height
      << ",\"provenance\":" << json_string(record.provenance) << "}";
  return out.str();
}

LabelRecord parse_record(const std::string& line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("malformed record: ") + e.what());
  }
  if (!doc.is_object()) throw Error("malformed record: not an object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_string() ||
      doc["schema_version"].get<std::string>() != kSchemaVersion) {
    throw Error("schema mismatch: expected schema_version \"" +
                std::string(kSchemaVersion) + "\"");
  }

  try {
    LabelRecord r;
    r.paper_id = doc.at("paper_id").get<std::string>();
    r.page = doc.at("page").get<int>();
    r.kind = kind_from_string(doc.at("kind").get<std::string>());
    r.figure_box =
        BBox{doc.at("fig_x1").get<double>(), doc.at("fig_y1").get<double>(),
             doc.at("fig_x2").get<double>(), doc.at("fig_y2").get<double>()};
    if (!r.figure_box.valid())
      throw Error("malformed record: degenerate figure box");

    const bool has_cap = !doc.at("cap_x1").is_null();
    for (const char* key : {"cap_y1", "cap_x2", "cap_y2"}) {
      if (doc.at(key).is_null() == has_cap)
        throw Error("malformed record: inconsistent caption box");
    }
    if (has_cap) {
      r.caption_box =
          BBox{doc.at("cap_x1").get<double>(), doc.at("cap_y1").get<double>(),
               doc.at("cap_x2").get<double>(), doc.at("cap_y2").get<double>()};
      if (!r.caption_box->valid())
        throw Error("malformed record: degenerate caption box");
    }
    if (!doc.at("caption_text").is_null())
      r.caption_text = doc.at("caption_text").get<std::string>();
    if (!doc.at("name").is_null()) r.name = doc.at("name").get<std::string>();
    r.dpi = doc.at("dpi").get<double>();
    r.page_width = doc.at("page_width").get<int>();
    r.page_height = doc.at("page_height").get<int>();
    r.provenance = doc.at("provenance").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed record: ") + e.what());
  }
}

std::vector<LabelRecord> read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  std::vector<LabelRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " (" + path.string() + ":" +
                  std::to_string(line_no) + ")");
    }
  }
  return out;
}

void write_label_file(const std::filesystem::path& path,
                      std::span<const LabelRecord> records) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file: " + tmp.string());
    for (const LabelRecord& r : records) {
      out << serialize_record(r) << "\n";
    }
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CorpusStats compute_stats(std::span<const LabelRecord> records) {
  struct PaperCounts {
    long figures = 0;
    long tables = 0;
  };
  std::map<std::string, PaperCounts> papers;
  CorpusStats stats;
  for (const LabelRecord& r : records) {
    PaperCounts& counts = papers[r.paper_id];
    if (r.kind == Kind::Figure) {
      ++counts.figures;
      ++stats.figure_count;
    } else {
      ++counts.tables;
      ++stats.table_count;
    }
  }
  stats.paper_count = static_cast<long>(papers.size());
  if (stats.paper_count == 0) return stats;

  std::map<long, long> fig_hist, tab_hist;
  for (const auto& [id, counts] : papers) {
    ++fig_hist[counts.figures];
    ++tab_hist[counts.tables];
  }
  for (const auto& [n, c] : fig_hist) {
    stats.figures_per_paper[n] = static_cast<double>(c) / stats.paper_count;
  }
  for (const auto& [n, c] : tab_hist) {
    stats.tables_per_paper[n] = static_cast<double>(c) / stats.paper_count;
  }
  return stats;
}

namespace {

void append_histogram(std::ostringstream& out,
                      const std::map<long, double>& hist) {
  out << "{";
  bool first = true;
  for (const auto& [count, fraction] : hist) {
    if (!first) out << ",";
    first = false;
    out << "\"" << count << "\":" << format_fixed(fraction, 6);
  }
  out << "}";
}

}  // namespace

std::string stats_to_json(const CorpusStats& stats) {
  std::ostringstream out;
  out << "{\"paper_count\":" << stats.paper_count
      << ",\"figure_count\":" << stats.figure_count
      << ",\"table_count\":" << stats.table_count << ",\"figures_per_paper\":";
  append_histogram(out, stats.figures_per_paper);
  out << ",\"tables_per_paper\":";
  append_histogram(out, stats.tables_per_paper);
  out << "}";
  return out.str();
}

std::string stats_to_table(const CorpusStats& stats) {
  std::ostringstream out;
  out << "papers  " << stats.paper_count << "\n"
      << "figures " << stats.figure_count << "\n"
      << "tables  " << stats.table_count << "\n";
  out << "figures/paper:";
  for (const auto& [n, f] : stats.figures_per_paper) {
    out << " " << n << "=" << format_fixed(f, 4);
  }
  out << "\ntables/paper:";
  for (const auto& [n, f] : stats.tables_per_paper) {
    out << " " << n << "=" << format_fixed(f, 4);
  }
  out << "\n";
  return out.str();
}

namespace {

void append_kind_report(std::ostringstream& out, const KindReport& r) {
  out << "{\"true_positives\":" << r.true_positives
      << ",\"false_positives\":" << r.false_positives
      << ",\"false_negatives\":" << r.false_negatives
      << ",\"precision\":" << format_fixed(r.precision, 6)
      << ",\"recall\":" << format_fixed(r.recall, 6)
      << ",\"f1\":" << format_fixed(r.f1, 6)
      << ",\"captions_checked\":" << r.captions_checked
      << ",\"captions_correct\":" << r.captions_correct << "}";
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  std::ostringstream out;
  out << "{\"figure\":";
  append_kind_report(out, report.figure);
  out << ",\"table\":";
  append_kind_report(out, report.table);
  out << ",\"pooled\":";
  append_kind_report(out, report.pooled);
  out << "}";
  return out.str();
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  out << "kind     TP    FP    FN    precision recall    f1\n";
  const auto row = [&](const char* name, const KindReport& r) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-8s %-5ld %-5ld %-5ld %-9s %-9s %-9s\n",
                  name, r.true_positives, r.false_positives, r.false_negatives,
                  format_fixed(r.precision, 4).c_str(),
                  format_fixed(r.recall, 4).c_str(),
                  format_fixed(r.f1, 4).c_str());
    out << buf;
  };
  row("figure", report.figure);
  row("table", report.table);
  row("pooled", report.pooled);
  return out.str();
}

}  // namespace figlabel
