#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "figlabel/geometry.hpp"
#include "figlabel/labels.hpp"

namespace figlabel {

// One box (prediction or ground truth) entering evaluation.
struct EvalItem {
  Kind kind = Kind::Figure;
  BBox box;
  std::optional<BBox> caption_box;
  std::optional<std::string> caption_text;
};

struct MatchedPair {
  int pred_index = 0;
  int truth_index = 0;
  double iou_value = 0.0;
};

inline constexpr double kDefaultEvalIou = 0.8;
// Cost for an infeasible pair; far above the 1.0 ceiling of real costs so
// the assignment always prefers feasible matches (and thus maximizes the
// match count).
inline constexpr double kInfeasibleCost = 10.0;

// Optimal assignment of predictions to truths on one page, kinds treated
// separately; only pairs with IOU strictly above the threshold are kept.
std::vector<MatchedPair> match_page(std::span<const EvalItem> preds,
                                    std::span<const EvalItem> truths,
                                    double iou_threshold = kDefaultEvalIou);

// A predicted caption is correct when its box IOU exceeds the threshold or
// its normalized text equals the truth's.
bool caption_correct(const std::optional<BBox>& pred_box,
                     const std::optional<std::string>& pred_text,
                     const BBox& truth_box, const std::string& truth_text,
                     double iou_threshold = kDefaultEvalIou);

// Case-folded, whitespace-collapsed, punctuation-trimmed caption text used
// by the text-equality fallback.
std::string normalize_caption_text(const std::string& text);

// Per-kind counters accumulated over pages.
struct KindCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long captions_checked = 0;
  long captions_correct = 0;

  KindCounts& operator+=(const KindCounts& other);
};

struct KindReport {
  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long captions_checked = 0;
  long captions_correct = 0;
};

struct EvalReport {
  KindReport figure;
  KindReport table;
  KindReport pooled;
};

KindReport make_kind_report(const KindCounts& counts);

// Aggregates per-page/per-kind counts into the final report.
EvalReport score_corpus(std::span<const std::pair<Kind, KindCounts>> page_counts);

// Convenience: evaluates one page end to end (matching plus caption checks)
// and returns the per-kind counts.
std::vector<std::pair<Kind, KindCounts>> evaluate_page(
    std::span<const EvalItem> preds, std::span<const EvalItem> truths,
    double iou_threshold = kDefaultEvalIou);

}  // namespace figlabel
