#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "figlabel/detection.hpp"
#include "figlabel/error.hpp"
#include "figlabel/evaluation.hpp"
#include "figlabel/latex_induction.hpp"
#include "figlabel/records.hpp"
#include "figlabel/xml_induction.hpp"

namespace fs = std::filesystem;
using namespace figlabel;

namespace {

bool log_enabled() {
  static const bool enabled = [] {
    const char* level = std::getenv("FIGLABEL_LOG");
    return level != nullptr &&
           (std::string_view(level) == "debug" || std::string_view(level) == "info");
  }();
  return enabled;
}

std::mutex log_mutex;

void log_line(const std::string& message) {
  if (!log_enabled()) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "figlabel: " << message << "\n";
}

// Runs fn(0..n_tasks) on `workers` threads. Task order inside a worker is
// nondeterministic; callers index results by task id to stay deterministic.
template <typename Fn>
void parallel_for(int n_tasks, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n_tasks));
  if (workers <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    threads.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void write_text_file(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void print_summary(const nlohmann::ordered_json& summary) {
  std::cout << summary.dump() << "\n";
}

struct CommonOpts {
  double dpi = 100.0;
  int workers = 1;
  std::string output;
};

int run_induce_latex(const std::string& original_dir,
                     const std::string& modified_dir,
                     const std::string& paper_id, const CommonOpts& opts) {
  const int original_pages = count_page_files(original_dir);
  const int modified_pages = count_page_files(modified_dir);
  if (original_pages != modified_pages) {
    throw Error("page count mismatch: original has " +
                std::to_string(original_pages) + " pages, modified has " +
                std::to_string(modified_pages));
  }

  std::vector<std::vector<InducedLabel>> per_page(original_pages);
  parallel_for(original_pages, opts.workers, [&](int page) {
    const PageRaster original =
        read_png(fs::path(original_dir) / page_file_name(page), opts.dpi);
    const PageRaster modified =
        read_png(fs::path(modified_dir) / page_file_name(page), opts.dpi);
    const auto mask = diff_pages(original, modified);
    const auto components = extract_components(mask, modified);
    per_page[page] = assemble_labels(paper_id, page,
                                     std::span<const DiffComponent>(components),
                                     modified);
    log_line("page " + std::to_string(page) + ": " +
             std::to_string(per_page[page].size()) + " labels");
  });

  std::vector<LabelRecord> records;
  for (const auto& labels : per_page) {
    for (const InducedLabel& label : labels) records.push_back(to_record(label));
  }
  write_label_file(opts.output, std::span<const LabelRecord>(records));

  nlohmann::ordered_json summary;
  summary["command"] = "induce-latex";
  summary["paper_id"] = paper_id;
  summary["pages"] = original_pages;
  summary["records"] = records.size();
  summary["output"] = opts.output;
  print_summary(summary);
  return 0;
}

int run_induce_xml(const std::string& paper_dir, std::string paper_id,
                   const CommonOpts& opts) {
  if (paper_id.empty()) paper_id = fs::path(paper_dir).filename().string();
  const XmlPaperResult result = induce_xml_paper(paper_dir, paper_id, opts.dpi);

  std::vector<LabelRecord> records;
  for (const InducedLabel& label : result.labels) records.push_back(to_record(label));
  write_label_file(opts.output, std::span<const LabelRecord>(records));

  nlohmann::ordered_json summary;
  summary["command"] = "induce-xml";
  summary["paper_id"] = paper_id;
  summary["records"] = records.size();
  if (result.skip_reason) {
    summary["skipped"] = true;
    summary["skip_reason"] = *result.skip_reason;
  } else {
    summary["skipped"] = false;
  }
  summary["output"] = opts.output;
  print_summary(summary);
  return 0;
}

int run_extract(const std::string& predictions_dir, const std::string& paragraphs_file,
                const std::string& paper_id, double confidence_threshold,
                double nms_iou, int page_width, int page_height,
                const CommonOpts& opts) {
  const int pages = count_indexed_files(predictions_dir, "pred-", ".json");

  // paragraphs.json: array of {text, page, x1, y1, x2, y2}.
  std::ifstream in(paragraphs_file);
  if (!in) throw Error("cannot open file: " + paragraphs_file);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("malformed manifest " + paragraphs_file + " at byte " +
                std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_array())
    throw Error("malformed manifest " + paragraphs_file + ": expected an array");
  std::map<int, std::vector<Paragraph>> paragraphs_by_page;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    try {
      Paragraph p;
      p.text = item.at("text").get<std::string>();
      p.bbox = BBox{item.at("x1").get<double>(), item.at("y1").get<double>(),
                    item.at("x2").get<double>(), item.at("y2").get<double>()};
      paragraphs_by_page[item.at("page").get<int>()].push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed manifest " + paragraphs_file + " entry " +
                  std::to_string(i) + ": " + e.what());
    }
  }

  std::vector<std::vector<FigureCaptionPair>> per_page(pages);
  parallel_for(pages, opts.workers, [&](int page) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "pred-%04d.json", page);
    const auto it = paragraphs_by_page.find(page);
    static const std::vector<Paragraph> kNoParagraphs;
    const auto& page_paragraphs =
        it == paragraphs_by_page.end() ? kNoParagraphs : it->second;
    per_page[page] =
        run_page(fs::path(predictions_dir) / buf,
                 std::span<const Paragraph>(page_paragraphs),
                 confidence_threshold, nms_iou);
    log_line("page " + std::to_string(page) + ": " +
             std::to_string(per_page[page].size()) + " pairs");
  });

  std::vector<LabelRecord> records;
  for (int page = 0; page < pages; ++page) {
    for (const FigureCaptionPair& pair : per_page[page]) {
      LabelRecord r;
      r.paper_id = paper_id;
      r.page = page;
      r.kind = pair.caption.kind;
      r.figure_box = pair.figure.bbox;
      r.caption_box = pair.caption.bbox;
      r.caption_text = pair.caption.text;
      r.name = (pair.caption.kind == Kind::Table ? "Table " : "Figure ") +
               pair.caption.number;
      r.dpi = opts.dpi;
      r.page_width = page_width;
      r.page_height = page_height;
      r.provenance = "detector";
      records.push_back(std::move(r));
    }
  }
  write_label_file(opts.output, std::span<const LabelRecord>(records));

  nlohmann::ordered_json summary;
  summary["command"] = "extract";
  summary["paper_id"] = paper_id;
  summary["pages"] = pages;
  summary["records"] = records.size();
  summary["output"] = opts.output;
  print_summary(summary);
  return 0;
}

int run_evaluate(const std::string& pred_file, const std::string& truth_file,
                 double eval_iou, const std::string& output) {
  const std::vector<LabelRecord> preds = read_label_file(pred_file);
  const std::vector<LabelRecord> truths = read_label_file(truth_file);

  struct PageItems {
    std::vector<EvalItem> preds;
    std::vector<EvalItem> truths;
  };
  std::map<std::pair<std::string, int>, PageItems> pages;
  for (const LabelRecord& r : preds) {
    pages[{r.paper_id, r.page}].preds.push_back(to_eval_item(r));
  }
  for (const LabelRecord& r : truths) {
    pages[{r.paper_id, r.page}].truths.push_back(to_eval_item(r));
  }

  std::vector<std::pair<Kind, KindCounts>> all_counts;
  for (const auto& [key, items] : pages) {
    const auto counts =
        evaluate_page(std::span<const EvalItem>(items.preds),
                      std::span<const EvalItem>(items.truths), eval_iou);
    all_counts.insert(all_counts.end(), counts.begin(), counts.end());
  }
  const EvalReport report =
      score_corpus(std::span<const std::pair<Kind, KindCounts>>(all_counts));

  std::cout << report_to_table(report);
  if (!output.empty()) {
    write_text_file(output, report_to_json(report) + "\n");
  } else {
    std::cout << report_to_json(report) << "\n";
  }
  return 0;
}

int run_stats(const std::string& label_file, const std::string& output) {
  const std::vector<LabelRecord> records = read_label_file(label_file);
  const CorpusStats stats = compute_stats(std::span<const LabelRecord>(records));
  std::cout << stats_to_table(stats);
  if (!output.empty()) {
    write_text_file(output, stats_to_json(stats) + "\n");
  } else {
    std::cout << stats_to_json(stats) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Induce, extract and evaluate figure/table bounding-box labels"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* latex = app.add_subcommand(
      "induce-latex", "Induce labels from original/modified page renderings");
  std::string original_dir, modified_dir, paper_id;
  latex->add_option("--original", original_dir, "Directory of original page-%04d.png")
      ->required();
  latex->add_option("--modified", modified_dir, "Directory of modified page-%04d.png")
      ->required();
  latex->add_option("--paper-id", paper_id, "Paper identifier")->required();
  latex->add_option("--dpi", opts.dpi, "Rasterization dpi (default 100)");
  latex->add_option("--workers", opts.workers, "Worker threads (default 1)");
  latex->add_option("--output", opts.output, "Output JSON-lines file")->required();

  auto* xml = app.add_subcommand(
      "induce-xml", "Induce labels from a paper directory with tokens.json and aux.json");
  std::string paper_dir, xml_paper_id;
  xml->add_option("paper_dir", paper_dir, "Paper directory")->required();
  xml->add_option("--paper-id", xml_paper_id, "Paper identifier (default: directory name)");
  xml->add_option("--dpi", opts.dpi, "Rasterization dpi (default 100)");
  xml->add_option("--workers", opts.workers, "Worker threads (default 1)");
  xml->add_option("--output", opts.output, "Output JSON-lines file")->required();

  auto* extract = app.add_subcommand(
      "extract", "Pair detector-backend boxes with caption paragraphs");
  std::string predictions_dir, paragraphs_file, extract_paper_id;
  double confidence_threshold = kDefaultConfidenceThreshold;
  double nms_iou = kDefaultNmsIou;
  int page_width = 0, page_height = 0;
  extract->add_option("--predictions-dir", predictions_dir,
                      "Directory of pred-%04d.json backend files")->required();
  extract->add_option("--paragraphs", paragraphs_file, "paragraphs.json file")
      ->required();
  extract->add_option("--paper-id", extract_paper_id, "Paper identifier")->required();
  extract->add_option("--confidence-threshold", confidence_threshold,
                      "Detection confidence threshold (default 0.5)");
  extract->add_option("--nms-iou", nms_iou, "NMS IOU threshold (default 0.5)");
  extract->add_option("--page-width", page_width, "Page width in pixels, if known");
  extract->add_option("--page-height", page_height, "Page height in pixels, if known");
  extract->add_option("--dpi", opts.dpi, "Rasterization dpi (default 100)");
  extract->add_option("--workers", opts.workers, "Worker threads (default 1)");
  extract->add_option("--output", opts.output, "Output JSON-lines file")->required();

  auto* evaluate = app.add_subcommand("evaluate",
                                      "Score predictions against ground truth");
  std::string pred_file, truth_file;
  double eval_iou = kDefaultEvalIou;
  evaluate->add_option("--pred", pred_file, "Predicted label file")->required();
  evaluate->add_option("--truth", truth_file, "Ground-truth label file")->required();
  evaluate->add_option("--eval-iou", eval_iou, "Match IOU threshold (default 0.8)");
  evaluate->add_option("--output", opts.output, "Write the JSON report here");

  auto* stats = app.add_subcommand("stats", "Corpus statistics for a label file");
  std::string label_file;
  stats->add_option("label_file", label_file, "JSON-lines label file")->required();
  stats->add_option("--output", opts.output, "Write the JSON stats here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (latex->parsed()) {
      return run_induce_latex(original_dir, modified_dir, paper_id, opts);
    }
    if (xml->parsed()) {
      return run_induce_xml(paper_dir, xml_paper_id, opts);
    }
    if (extract->parsed()) {
      return run_extract(predictions_dir, paragraphs_file, extract_paper_id,
                         confidence_threshold, nms_iou, page_width, page_height,
                         opts);
    }
    if (evaluate->parsed()) {
      return run_evaluate(pred_file, truth_file, eval_iou, opts.output);
    }
    if (stats->parsed()) {
      return run_stats(label_file, opts.output);
    }
  } catch (const std::exception& e) {
    std::cerr << "figlabel: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
