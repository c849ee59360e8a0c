#include "figlabel/evaluation.hpp"

#include <algorithm>
#include <cctype>

namespace figlabel {

namespace {

std::vector<MatchedPair> match_one_kind(std::span<const EvalItem> preds,
                                        std::span<const EvalItem> truths,
                                        std::span<const int> pred_ids,
                                        std::span<const int> truth_ids,
                                        double iou_threshold) {
  std::vector<MatchedPair> out;
  if (pred_ids.empty() || truth_ids.empty()) return out;

  std::vector<std::vector<double>> cost(pred_ids.size(),
                                        std::vector<double>(truth_ids.size()));
  for (std::size_t p = 0; p < pred_ids.size(); ++p) {
    for (std::size_t t = 0; t < truth_ids.size(); ++t) {
      const double value = iou(preds[pred_ids[p]].box, truths[truth_ids[t]].box);
      cost[p][t] = value > iou_threshold ? 1.0 - value : kInfeasibleCost;
    }
  }
  for (const auto& [p, t] : solve_assignment(cost).pairs) {
    const double value = iou(preds[pred_ids[p]].box, truths[truth_ids[t]].box);
    if (value > iou_threshold) {
      out.push_back(MatchedPair{pred_ids[p], truth_ids[t], value});
    }
  }
  return out;
}

}  // namespace

std::vector<MatchedPair> match_page(std::span<const EvalItem> preds,
                                    std::span<const EvalItem> truths,
                                    double iou_threshold) {
  std::vector<MatchedPair> out;
  for (Kind kind : {Kind::Figure, Kind::Table}) {
    std::vector<int> pred_ids, truth_ids;
    for (int i = 0; i < static_cast<int>(preds.size()); ++i) {
      if (preds[i].kind == kind) pred_ids.push_back(i);
    }
    for (int i = 0; i < static_cast<int>(truths.size()); ++i) {
      if (truths[i].kind == kind) truth_ids.push_back(i);
    }
    const auto pairs =
        match_one_kind(preds, truths, pred_ids, truth_ids, iou_threshold);
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  std::sort(out.begin(), out.end(), [](const MatchedPair& a, const MatchedPair& b) {
    return a.pred_index < b.pred_index;
  });
  return out;
}

std::string normalize_caption_text(const std::string& text) {
  // Trim surrounding punctuation/whitespace, collapse inner whitespace runs,
  // case-fold.
  std::size_t begin = 0, end = text.size();
  auto trimmed = [&](std::size_t i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    return std::isspace(c) || std::ispunct(c);
  };
  while (begin < end && trimmed(begin)) ++begin;
  while (end > begin && trimmed(end - 1)) --end;

  std::string out;
  out.reserve(end - begin);
  bool in_space = false;
  for (std::size_t i = begin; i < end; ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      in_space = true;
      continue;
    }
    if (in_space) {
      out.push_back(' ');
      in_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

bool caption_correct(const std::optional<BBox>& pred_box,
                     const std::optional<std::string>& pred_text,
                     const BBox& truth_box, const std::string& truth_text,
                     double iou_threshold) {
  if (pred_box && iou(*pred_box, truth_box) > iou_threshold) return true;
  if (pred_text &&
      normalize_caption_text(*pred_text) == normalize_caption_text(truth_text)) {
    return true;
  }
  return false;
}

KindCounts& KindCounts::operator+=(const KindCounts& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  captions_checked += other.captions_checked;
  captions_correct += other.captions_correct;
  return *this;
}

KindReport make_kind_report(const KindCounts& counts) {
  KindReport r;
  r.true_positives = counts.tp;
  r.false_positives = counts.fp;
  r.false_negatives = counts.fn;
  const double tp = static_cast<double>(counts.tp);
  r.precision = counts.tp + counts.fp > 0 ? tp / (counts.tp + counts.fp) : 0.0;
  r.recall = counts.tp + counts.fn > 0 ? tp / (counts.tp + counts.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.captions_checked = counts.captions_checked;
  r.captions_correct = counts.captions_correct;
  return r;
}

EvalReport score_corpus(std::span<const std::pair<Kind, KindCounts>> page_counts) {
  KindCounts figure, table, pooled;
  for (const auto& [kind, counts] : page_counts) {
    (kind == Kind::Figure ? figure : table) += counts;
    pooled += counts;
  }
  EvalReport report;
  report.figure = make_kind_report(figure);
  report.table = make_kind_report(table);
  report.pooled = make_kind_report(pooled);
  return report;
}

std::vector<std::pair<Kind, KindCounts>> evaluate_page(
    std::span<const EvalItem> preds, std::span<const EvalItem> truths,
    double iou_threshold) {
  const std::vector<MatchedPair> matches = match_page(preds, truths, iou_threshold);

  std::vector<std::pair<Kind, KindCounts>> out;
  for (Kind kind : {Kind::Figure, Kind::Table}) {
    KindCounts counts;
    std::vector<char> pred_matched(preds.size(), 0), truth_matched(truths.size(), 0);
    for (const MatchedPair& m : matches) {
      if (preds[m.pred_index].kind != kind) continue;
      pred_matched[m.pred_index] = 1;
      truth_matched[m.truth_index] = 1;
      ++counts.tp;
      const EvalItem& truth = truths[m.truth_index];
      if (truth.caption_box) {
        ++counts.captions_checked;
        if (caption_correct(preds[m.pred_index].caption_box,
                            preds[m.pred_index].caption_text, *truth.caption_box,
                            truth.caption_text.value_or(std::string{}),
                            iou_threshold)) {
          ++counts.captions_correct;
        }
      }
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].kind == kind && !pred_matched[i]) ++counts.fp;
    }
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (truths[i].kind == kind && !truth_matched[i]) ++counts.fn;
    }
    out.emplace_back(kind, counts);
  }
  return out;
}

}  // namespace figlabel
