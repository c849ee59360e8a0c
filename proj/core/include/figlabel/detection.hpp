#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "figlabel/geometry.hpp"
#include "figlabel/labels.hpp"

namespace figlabel {

// One grid cell's output from a detector backend.
struct GridPrediction {
  int row = 0;
  int col = 0;
  BBox bbox;
  double confidence = 0.0;
};

struct Detection {
  BBox bbox;
  double confidence = 0.0;
};

// A paragraph whose text opens with a caption header ("Figure 3:", ...).
struct CaptionBlock {
  Kind kind = Kind::Figure;
  std::string number;  // as written, e.g. "3" or "IV"
  std::string text;
  BBox bbox;
};

struct Paragraph {
  std::string text;
  BBox bbox;
};

struct FigureCaptionPair {
  Detection figure;
  CaptionBlock caption;
  double center_distance = 0.0;
};

inline constexpr double kDefaultConfidenceThreshold = 0.5;
inline constexpr double kDefaultNmsIou = 0.5;

// Keeps predictions with confidence strictly above the threshold, ordered by
// descending confidence. Throws Error("invalid threshold") outside [0, 1].
std::vector<Detection> threshold_detections(
    std::span<const GridPrediction> preds,
    double threshold = kDefaultConfidenceThreshold);

// Greedy non-maximum suppression: highest confidence first, suppressing
// boxes with IOU >= iou_threshold against a kept box. Ties are broken by
// larger area, then top-left position.
std::vector<Detection> nms(std::span<const Detection> dets,
                           double iou_threshold = kDefaultNmsIou);

// Scans paragraphs for caption headers: case-insensitive "figure"/"fig."/
// "fig"/"table", optional whitespace, a decimal or roman number, then '.',
// ':' or whitespace/end.
std::vector<CaptionBlock> detect_caption_blocks(std::span<const Paragraph> paragraphs);

// Parses a single paragraph as a caption header; returns false when the text
// does not open with one.
bool parse_caption_header(const std::string& text, Kind* kind, std::string* number);

// Pairs figures with captions minimizing the total distance between box
// centers; returns min(figure count, caption count) pairs.
std::vector<FigureCaptionPair> pair_figures_captions(
    std::span<const Detection> figures, std::span<const CaptionBlock> captions);

// Parses a backend predictions file: a JSON array of
// {row, col, x1, y1, x2, y2, confidence}. Malformed input raises an Error
// naming the file and byte offset.
std::vector<GridPrediction> parse_grid_predictions(const std::filesystem::path& path);
std::vector<GridPrediction> parse_grid_predictions_text(const std::string& text,
                                                        const std::string& origin);

// threshold -> nms -> caption detection -> pairing for one page.
std::vector<FigureCaptionPair> run_page(
    const std::filesystem::path& backend_file,
    std::span<const Paragraph> paragraphs,
    double confidence_threshold = kDefaultConfidenceThreshold,
    double nms_iou = kDefaultNmsIou);

}  // namespace figlabel
