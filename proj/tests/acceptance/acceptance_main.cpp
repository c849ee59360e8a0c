// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "figlabel/detection.hpp"
#include "figlabel/error.hpp"
#include "figlabel/evaluation.hpp"
#include "figlabel/latex_induction.hpp"
#include "figlabel/records.hpp"
#include "figlabel/template_match.hpp"
#include "figlabel/text_match.hpp"
#include "figlabel/xml_induction.hpp"
#include "testutil/oracles.hpp"
#include "testutil/synthetic.hpp"

using namespace figlabel;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure(detail);
}

std::string random_letters(std::mt19937& rng, int max_len, int alphabet) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> c(0, alphabet - 1);
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + c(rng)));
  return s;
}

// --- criterion 1 -----------------------------------------------------------

void fuzzy_substring_oracle() {
  std::mt19937 rng(1001);
  for (int trial = 0; trial < 220; ++trial) {
    std::string needle = random_letters(rng, 12, 4);
    if (needle.empty()) needle = "a";
    const std::string haystack = random_letters(rng, 60, 4);
    const int got = fuzzy_substring(needle, haystack).distance;
    const int expected = oracles::min_substring_levenshtein(needle, haystack);
    require(got == expected,
            "case " + std::to_string(trial) + ": needle '" + needle +
                "' haystack '" + haystack + "': got " + std::to_string(got) +
                " expected " + std::to_string(expected));
  }
}

// --- criterion 2 -----------------------------------------------------------

void bag_of_words_oracle() {
  std::mt19937 rng(1002);
  std::uniform_int_distribution<int> page_len(1, 40);
  std::uniform_int_distribution<int> table_len(1, 10);
  std::uniform_int_distribution<int> letter(0, 4);
  for (int trial = 0; trial < 220; ++trial) {
    std::vector<std::string> tokens, table;
    const int n = page_len(rng);
    for (int i = 0; i < n; ++i) tokens.push_back(std::string(1, 'a' + letter(rng)));
    const int m = table_len(rng);
    for (int i = 0; i < m; ++i) table.push_back(std::string(1, 'a' + letter(rng)));
    const auto got = bag_of_words_interval(table, tokens);
    const auto expected = oracles::exhaustive_interval(table, tokens);
    require(got.distance == expected.distance &&
                got.start_token == expected.start && got.end_token == expected.end,
            "case " + std::to_string(trial) + ": got (" +
                std::to_string(got.start_token) + "," +
                std::to_string(got.end_token) + ")=" +
                std::to_string(got.distance) + " expected (" +
                std::to_string(expected.start) + "," +
                std::to_string(expected.end) + ")=" +
                std::to_string(expected.distance));
  }
}

// --- criterion 3 -----------------------------------------------------------

void assignment_oracle() {
  std::mt19937 rng(1003);
  std::uniform_int_distribution<int> small(1, 6);
  std::uniform_int_distribution<int> large(6, 9);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  std::uniform_int_distribution<int> int_value(0, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int trial = 0; trial < 220; ++trial) {
    int rows = small(rng), cols = small(rng);
    if (trial % 4 == 0) (trial % 2 ? rows : cols) = large(rng);
    const bool integral = unit(rng) < 0.5;
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols));
    for (auto& row : cost) {
      for (double& c : row) c = integral ? double(int_value(rng)) : value(rng);
    }
    const Assignment got = solve_assignment(cost);
    const auto expected = oracles::brute_force_assignment(cost);
    require(std::abs(got.total_cost - expected.total_cost) <= 1e-9,
            "case " + std::to_string(trial) + ": cost " +
                std::to_string(got.total_cost) + " expected " +
                std::to_string(expected.total_cost));
    require(got.pairs == expected.pairs,
            "case " + std::to_string(trial) + ": tie-break mismatch");
  }
}

// --- criterion 4 -----------------------------------------------------------

void latex_round_trip() {
  std::mt19937 rng(1004);
  int pages = 0, frames_checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n_floats = 1 + trial % 3;
    const auto fx = synthetic::make_latex_fixture(rng, n_floats);
    ++pages;

    const auto mask = diff_pages(fx.original, fx.modified);
    const auto components = extract_components(mask, fx.modified);

    // Every drawn frame is recovered exactly, with the right color class.
    for (const auto& expected : fx.floats) {
      const ColorClass want = expected.kind == Kind::Figure
                                  ? ColorClass::FigureFrame
                                  : ColorClass::TableFrame;
      bool found = false;
      for (const auto& c : components) {
        if (c.color_class == want && c.bbox == expected.frame) {
          found = true;
          break;
        }
      }
      require(found, "page " + std::to_string(trial) + ": frame not recovered");
      ++frames_checked;
    }

    const auto labels =
        assemble_labels("acceptance", trial,
                        std::span<const DiffComponent>(components), fx.modified);
    require(labels.size() == fx.floats.size(),
            "page " + std::to_string(trial) + ": expected " +
                std::to_string(fx.floats.size()) + " labels, got " +
                std::to_string(labels.size()));

    for (const auto& expected : fx.floats) {
      bool found = false;
      for (const auto& label : labels) {
        if (label.kind != expected.kind) continue;
        if (label.figure_box == expected.carved &&
            label.caption_box.has_value() == expected.has_caption &&
            (!expected.has_caption ||
             *label.caption_box == expected.caption_enclosure)) {
          found = true;
          break;
        }
      }
      require(found, "page " + std::to_string(trial) + ": label mismatch");
    }

    // Carved boxes never intersect caption bands.
    for (const auto& label : labels) {
      if (!label.caption_box) continue;
      const BBox& g = label.figure_box;
      const BBox& c = *label.caption_box;
      const bool overlap = g.x1 < c.x2 && c.x1 < g.x2 && g.y1 < c.y2 && c.y1 < g.y2;
      require(!overlap, "page " + std::to_string(trial) +
                            ": carved box intersects its caption band");
    }
  }
  require(pages == 50 && frames_checked >= 50, "fixture generation shortfall");
}

// --- criterion 5 -----------------------------------------------------------

void template_recovery() {
  std::mt19937 rng(1005);
  const int page_w = 440, page_h = 330;
  std::uniform_real_distribution<double> scale_dist(0.10, 0.95);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int trial = 0; trial < 20; ++trial) {
    const int tw = 200, th = 130;
    const GrayImage source = synthetic::make_texture(rng, tw, th);

    const double s = scale_dist(rng);
    const int ew = std::max(1, (int)std::lround(s * page_w));
    const double f = double(ew) / tw;
    const int eh = std::max(1, (int)std::lround(th * f));
    if (eh > page_h - 2) {  // keep the embed inside the page
      continue;
    }
    std::uniform_int_distribution<int> x_dist(0, page_w - ew);
    std::uniform_int_distribution<int> y_dist(0, page_h - eh);
    const int ex = x_dist(rng), ey = y_dist(rng);

    GrayImage page = GrayImage::zeros(page_w, page_h);
    for (double& v : page.values) v = 255.0;
    synthetic::paste(page, resize(source, ew, eh), ex, ey);

    const TemplateMatch m = match_template_multiscale(page, source);
    require(m.score > 0.9, "page " + std::to_string(trial) + ": score " +
                               std::to_string(m.score) + " at scale " +
                               std::to_string(s));
    const Point got = center(m.bbox);
    const double cx = ex + ew / 2.0, cy = ey + eh / 2.0;
    require(std::abs(got.x - cx) <= 0.02 * page_w &&
                std::abs(got.y - cy) <= 0.02 * page_h,
            "page " + std::to_string(trial) + ": center (" +
                std::to_string(got.x) + "," + std::to_string(got.y) +
                ") expected (" + std::to_string(cx) + "," + std::to_string(cy) +
                ")");

    // A template that never appears on the page must fall below 0.8 and
    // trigger the paper-exclusion path.
    if (trial % 4 == 0) {
      const GrayImage other = synthetic::make_texture(rng, tw, th, 8);
      const TemplateMatch bad = match_template_multiscale(page, other);
      require(bad.score < kFigureMatchThreshold,
              "page " + std::to_string(trial) + ": mismatched template scored " +
                  std::to_string(bad.score));
      require(!accept_figure_match(bad), "exclusion path not triggered");
    }
  }
}

// --- criterion 6 -----------------------------------------------------------

void evaluation_arithmetic() {
  // Two matched figures, one stray prediction, two missed truths.
  std::vector<EvalItem> preds = {
      EvalItem{Kind::Figure, BBox{0, 0, 10, 10}, {}, {}},
      EvalItem{Kind::Figure, BBox{20, 0, 30, 10}, {}, {}},
      EvalItem{Kind::Figure, BBox{200, 200, 210, 210}, {}, {}},
  };
  std::vector<EvalItem> truths = {
      EvalItem{Kind::Figure, BBox{0, 0, 10, 10}, {}, {}},
      EvalItem{Kind::Figure, BBox{20, 0, 30, 10}, {}, {}},
      EvalItem{Kind::Figure, BBox{100, 100, 110, 110}, {}, {}},
      EvalItem{Kind::Figure, BBox{140, 100, 150, 110}, {}, {}},
  };
  const auto counts = evaluate_page(preds, truths);
  const EvalReport report =
      score_corpus(std::span<const std::pair<Kind, KindCounts>>(counts));
  require(report.figure.true_positives == 2 && report.figure.false_positives == 1 &&
              report.figure.false_negatives == 2,
          "unexpected TP/FP/FN");
  require(std::abs(report.figure.precision - 0.6667) <= 1e-4, "precision");
  require(std::abs(report.figure.recall - 0.5000) <= 1e-4, "recall");
  require(std::abs(report.figure.f1 - 0.5714) <= 1e-4, "f1");

  // Self-evaluation of an arbitrary label set is perfect.
  std::mt19937 rng(1006);
  std::uniform_real_distribution<double> coord(0.0, 300.0);
  std::uniform_real_distribution<double> size(5.0, 60.0);
  std::uniform_int_distribution<int> flag(0, 1);
  std::vector<EvalItem> items;
  for (int i = 0; i < 40; ++i) {
    const double x1 = coord(rng), y1 = coord(rng);
    items.push_back(EvalItem{flag(rng) ? Kind::Table : Kind::Figure,
                             BBox{x1, y1, x1 + size(rng), y1 + size(rng)},
                             {},
                             {}});
  }
  const auto self_counts = evaluate_page(items, items);
  const EvalReport self =
      score_corpus(std::span<const std::pair<Kind, KindCounts>>(self_counts));
  require(self.pooled.f1 == 1.0, "self-evaluation f1 != 1.0");
  require(self.pooled.false_positives == 0 && self.pooled.false_negatives == 0,
          "self-evaluation has mismatches");
}

// --- criterion 7 -----------------------------------------------------------

void nms_threshold_properties() {
  std::mt19937 rng(1007);
  std::uniform_int_distribution<int> n(0, 14);
  std::uniform_real_distribution<double> coord(0.0, 90.0);
  std::uniform_real_distribution<double> size(2.0, 50.0);
  std::uniform_real_distribution<double> conf(0.0, 1.0);

  for (int trial = 0; trial < 550; ++trial) {
    std::vector<Detection> dets;
    std::vector<GridPrediction> preds;
    const int count = n(rng);
    for (int i = 0; i < count; ++i) {
      const double x1 = coord(rng), y1 = coord(rng);
      const BBox box{x1, y1, x1 + size(rng), y1 + size(rng)};
      const double c = conf(rng);
      dets.push_back(Detection{box, c});
      preds.push_back(GridPrediction{0, i, box, c});
    }

    // Strict-greater thresholding at 0.5.
    const auto kept = threshold_detections(preds, 0.5);
    std::size_t above = 0;
    for (const auto& p : preds) {
      if (p.confidence > 0.5) ++above;
    }
    require(kept.size() == above, "threshold kept a wrong count");
    for (const auto& d : kept) require(d.confidence > 0.5, "kept non-above");

    const auto survivors = nms(dets);
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      for (std::size_t j = i + 1; j < survivors.size(); ++j) {
        require(iou(survivors[i].bbox, survivors[j].bbox) < kDefaultNmsIou,
                "surviving pair at or above the NMS threshold");
      }
    }
    const auto again = nms(survivors);
    require(again.size() == survivors.size(), "nms not idempotent (size)");
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      require(again[i].bbox == survivors[i].bbox &&
                  again[i].confidence == survivors[i].confidence,
              "nms not idempotent (fields)");
    }
  }
}

// --- criterion 8 -----------------------------------------------------------

struct CommandResult {
  int status = -1;
  std::string output;
};

CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buffer;
  std::size_t got;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), got);
  }
  const int rc = pclose(pipe);
  result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return result;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Builds the fixture corpus once: a LaTeX page-pair paper, an XML paper and
// a detector-backend paper.
struct FixtureCorpus {
  fs::path root;
  fs::path latex_original, latex_modified;
  fs::path xml_paper;
  fs::path det_dir, paragraphs;
};

FixtureCorpus build_fixture_corpus() {
  FixtureCorpus corpus;
  corpus.root = fs::temp_directory_path() / "figlabel_acceptance";
  fs::remove_all(corpus.root);
  corpus.latex_original = corpus.root / "latex" / "original";
  corpus.latex_modified = corpus.root / "latex" / "modified";
  corpus.xml_paper = corpus.root / "xml" / "paperA";
  corpus.det_dir = corpus.root / "det";
  fs::create_directories(corpus.latex_original);
  fs::create_directories(corpus.latex_modified);
  fs::create_directories(corpus.xml_paper);
  fs::create_directories(corpus.det_dir);

  std::mt19937 rng(1008);
  for (int page = 0; page < 3; ++page) {
    const auto fx = synthetic::make_latex_fixture(rng, 1 + page);
    write_png(corpus.latex_original / page_file_name(page), fx.original);
    write_png(corpus.latex_modified / page_file_name(page), fx.modified);
  }

  // XML paper: one embedded figure plus one table in the token layer.
  {
    const int page_w = 440, page_h = 330;
    const int fig_w = 180, fig_h = 110;  // on-grid at scale_16
    GrayImage page = GrayImage::zeros(page_w, page_h);
    for (double& v : page.values) v = 255.0;
    const GrayImage figure = synthetic::make_texture(rng, fig_w, fig_h);
    synthetic::paste(page, figure, 40, 30);
    write_png(corpus.xml_paper / "page-0000.png", synthetic::gray_to_raster(page));
    write_png(corpus.xml_paper / "fig-0.png", synthetic::gray_to_raster(figure));
    write_png(corpus.xml_paper / "page-0001.png",
              PageRaster::blank(page_w, page_h));

    std::ostringstream tokens;
    tokens << "[";
    // Figure caption on page 0.
    const std::vector<std::string> fig_caption = {"Figure", "1:", "an",
                                                  "embedded", "texture"};
    bool first = true;
    for (std::size_t i = 0; i < fig_caption.size(); ++i) {
      if (!first) tokens << ",";
      first = false;
      const double x = 20 + 60.0 * i;
      tokens << R"({"text":")" << fig_caption[i] << R"(","page":0,"x1":)" << x
             << R"(,"y1":300,"x2":)" << x + 55 << R"(,"y2":312})";
    }
    // Table cells and caption on page 1.
    const std::vector<std::string> cells = {"alpha", "beta",  "gamma", "delta",
                                            "eps",   "zeta",  "eta",   "theta"};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      tokens << ",";
      const double x = 30 + 90.0 * (i % 4);
      const double y = 80 + 30.0 * (i / 4);
      tokens << R"({"text":")" << cells[i] << R"(","page":1,"x1":)" << x
             << R"(,"y1":)" << y << R"(,"x2":)" << x + 80 << R"(,"y2":)" << y + 12
             << "}";
    }
    const std::vector<std::string> tab_caption = {"Table", "1.", "synthetic",
                                                  "cells"};
    for (std::size_t i = 0; i < tab_caption.size(); ++i) {
      tokens << ",";
      const double x = 30 + 70.0 * i;
      tokens << R"({"text":")" << tab_caption[i] << R"(","page":1,"x1":)" << x
             << R"(,"y1":200,"x2":)" << x + 60 << R"(,"y2":212})";
    }
    tokens << "]";
    std::ofstream(corpus.xml_paper / "tokens.json") << tokens.str();

    std::ofstream(corpus.xml_paper / "aux.json")
        << R"([{"type":"figure","caption":"Figure 1: an embedded texture",)"
        << R"("image_file":"fig-0.png"},)"
        << R"({"type":"table","caption":"Table 1. synthetic cells",)"
        << R"("cells":["alpha","beta","gamma","delta","eps","zeta","eta","theta"]}])";
  }

  // Detector backend: two pages of grid predictions plus paragraphs.
  std::ofstream(corpus.det_dir / "pred-0000.json")
      << R"([{"row":0,"col":0,"x1":10,"y1":10,"x2":120,"y2":90,"confidence":0.92},)"
      << R"({"row":0,"col":1,"x1":12,"y1":10,"x2":122,"y2":90,"confidence":0.81},)"
      << R"({"row":1,"col":0,"x1":10,"y1":200,"x2":80,"y2":280,"confidence":0.4}])";
  std::ofstream(corpus.det_dir / "pred-0001.json")
      << R"([{"row":0,"col":0,"x1":30,"y1":40,"x2":200,"y2":180,"confidence":0.77}])";
  corpus.paragraphs = corpus.det_dir / "paragraphs.json";
  std::ofstream(corpus.paragraphs)
      << R"([{"text":"Figure 1: detector caption","page":0,"x1":10,"y1":95,"x2":120,"y2":110},)"
      << R"({"text":"Body text paragraph","page":0,"x1":10,"y1":120,"x2":120,"y2":160},)"
      << R"({"text":"Table 2: another caption","page":1,"x1":30,"y1":185,"x2":200,"y2":200}])";
  return corpus;
}

void end_to_end_determinism() {
  const std::string cli = FIGLABEL_CLI_PATH;
  require(fs::exists(cli), "CLI binary not found at " + cli);
  const FixtureCorpus corpus = build_fixture_corpus();
  const fs::path out = corpus.root / "out";
  fs::create_directories(out);

  struct Step {
    std::string name;
    std::string command;
    fs::path output_file;
  };
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };

  std::vector<Step> steps;
  steps.push_back(
      {"induce-latex",
       q(cli) + " induce-latex --original " + q(corpus.latex_original) +
           " --modified " + q(corpus.latex_modified) +
           " --paper-id fx-latex --output " + q(out / "latex.jsonl"),
       out / "latex.jsonl"});
  steps.push_back(
      {"induce-latex --workers 2",
       q(cli) + " induce-latex --original " + q(corpus.latex_original) +
           " --modified " + q(corpus.latex_modified) +
           " --paper-id fx-latex --workers 2 --output " + q(out / "latex.jsonl"),
       out / "latex.jsonl"});
  steps.push_back({"induce-xml",
                   q(cli) + " induce-xml " + q(corpus.xml_paper) +
                       " --paper-id fx-xml --output " + q(out / "xml.jsonl"),
                   out / "xml.jsonl"});
  steps.push_back(
      {"extract",
       q(cli) + " extract --predictions-dir " + q(corpus.det_dir) +
           " --paragraphs " + q(corpus.paragraphs) +
           " --paper-id fx-det --page-width 440 --page-height 330 --output " +
           q(out / "det.jsonl"),
       out / "det.jsonl"});
  steps.push_back(
      {"extract --workers 2",
       q(cli) + " extract --predictions-dir " + q(corpus.det_dir) +
           " --paragraphs " + q(corpus.paragraphs) +
           " --paper-id fx-det --page-width 440 --page-height 330 --workers 2 "
           "--output " + q(out / "det.jsonl"),
       out / "det.jsonl"});
  steps.push_back({"evaluate",
                   q(cli) + " evaluate --pred " + q(out / "latex.jsonl") +
                       " --truth " + q(out / "latex.jsonl") + " --output " +
                       q(out / "report.json"),
                   out / "report.json"});
  steps.push_back({"stats",
                   q(cli) + " stats " + q(out / "latex.jsonl") + " --output " +
                       q(out / "stats.json"),
                   out / "stats.json"});

  // Prime the label files once so evaluate/stats inputs exist.
  for (const Step& step : steps) {
    const CommandResult first = run_command(step.command);
    require(first.status == 0,
            step.name + " exited with " + std::to_string(first.status));
    const std::string file_first = read_file(step.output_file);
    const std::string stdout_first = first.output;

    const CommandResult second = run_command(step.command);
    require(second.status == 0, step.name + " second run failed");
    require(second.output == stdout_first, step.name + ": stdout differs");
    require(read_file(step.output_file) == file_first,
            step.name + ": output file differs between runs");
    require(!file_first.empty(), step.name + ": empty output");
  }

  // The induced label files really contain records, and self-evaluation via
  // the CLI is perfect.
  require(read_label_file(out / "latex.jsonl").size() >= 3,
          "latex fixture produced too few records");
  require(read_label_file(out / "xml.jsonl").size() == 2,
          "xml fixture should produce exactly two records");
  require(read_label_file(out / "det.jsonl").size() == 2,
          "extract fixture should produce exactly two pairs");
  const std::string report = read_file(out / "report.json");
  require(report.find("\"f1\":1.000000") != std::string::npos,
          "self-evaluation report is not perfect");

  fs::remove_all(corpus.root);
}

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // 0 = no stated limit
  std::function<void()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "fuzzy-substring oracle equivalence (220 cases)", 10, fuzzy_substring_oracle},
      {2, "bag-of-words oracle equivalence (220 cases)", 10, bag_of_words_oracle},
      {3, "assignment oracle equivalence (220 matrices)", 10, assignment_oracle},
      {4, "latex-diff synthetic round trip (50 pages)", 30, latex_round_trip},
      {5, "template-matching recovery (20 pages)", 60, template_recovery},
      {6, "evaluation arithmetic fixture", 0, evaluation_arithmetic},
      {7, "nms/threshold properties (550 sets)", 10, nms_threshold_properties},
      {8, "end-to-end CLI determinism", 0, end_to_end_determinism},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (error.empty() && criterion.time_limit_s > 0 &&
        elapsed > criterion.time_limit_s) {
      error = "exceeded time limit of " + std::to_string(criterion.time_limit_s) +
              " s";
    }
    if (error.empty()) {
      std::printf("[PASS] %d %s (%.2f s)\n", criterion.id,
                  criterion.name.c_str(), elapsed);
    } else {
      ++failures;
      std::printf("[FAIL] %d %s (%.2f s): %s\n", criterion.id,
                  criterion.name.c_str(), elapsed, error.c_str());
    }
  }
  return failures == 0 ? 0 : 1;
}
