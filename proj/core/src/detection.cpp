#include "figlabel/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "figlabel/error.hpp"

namespace figlabel {

namespace {

bool detection_order(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  const double area_a = a.bbox.area();
  const double area_b = b.bbox.area();
  if (area_a != area_b) return area_a > area_b;
  if (a.bbox.y1 != b.bbox.y1) return a.bbox.y1 < b.bbox.y1;
  return a.bbox.x1 < b.bbox.x1;
}

}  // namespace

std::vector<Detection> threshold_detections(std::span<const GridPrediction> preds,
                                            double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error("invalid threshold");
  std::vector<Detection> out;
  for (const GridPrediction& p : preds) {
    if (p.confidence > threshold) out.push_back(Detection{p.bbox, p.confidence});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.confidence > b.confidence;
                   });
  return out;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
  std::vector<Detection> sorted(dets.begin(), dets.end());
  std::sort(sorted.begin(), sorted.end(), detection_order);

  std::vector<Detection> kept;
  std::vector<char> suppressed(sorted.size(), 0);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(sorted[i]);
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (!suppressed[j] && iou(sorted[i].bbox, sorted[j].bbox) >= iou_threshold) {
        suppressed[j] = 1;
      }
    }
  }
  return kept;
}

namespace {

// Caption headers: keyword, optional whitespace, decimal or roman number,
// then '.', ':' or whitespace/end of text.
const std::regex& caption_header_regex() {
  static const std::regex re(
      R"(^(figure|fig\.|fig|table)\s*([0-9]+|[ivxlcdm]+)(?:[.:]|\s|$))",
      std::regex::icase | std::regex::optimize);
  return re;
}

}  // namespace

bool parse_caption_header(const std::string& text, Kind* kind, std::string* number) {
  std::size_t start = 0;
  while (start < text.size() && std::isspace(static_cast<unsigned char>(text[start])))
    ++start;
  std::smatch m;
  const std::string stripped = text.substr(start);
  if (!std::regex_search(stripped, m, caption_header_regex())) return false;
  const std::string keyword = m[1].str();
  *kind = (keyword[0] == 't' || keyword[0] == 'T') ? Kind::Table : Kind::Figure;
  *number = m[2].str();
  return true;
}

std::vector<CaptionBlock> detect_caption_blocks(std::span<const Paragraph> paragraphs) {
  std::vector<CaptionBlock> out;
  for (const Paragraph& p : paragraphs) {
    Kind kind;
    std::string number;
    if (!parse_caption_header(p.text, &kind, &number)) continue;
    std::size_t start = 0;
    while (start < p.text.size() &&
           std::isspace(static_cast<unsigned char>(p.text[start])))
      ++start;
    out.push_back(CaptionBlock{kind, number, p.text.substr(start), p.bbox});
  }
  return out;
}

std::vector<FigureCaptionPair> pair_figures_captions(
    std::span<const Detection> figures, std::span<const CaptionBlock> captions) {
  if (figures.empty() || captions.empty()) return {};
  std::vector<std::vector<double>> cost(figures.size(),
                                        std::vector<double>(captions.size()));
  for (std::size_t f = 0; f < figures.size(); ++f) {
    for (std::size_t c = 0; c < captions.size(); ++c) {
      cost[f][c] = distance(center(figures[f].bbox), center(captions[c].bbox));
    }
  }
  std::vector<FigureCaptionPair> out;
  for (const auto& [f, c] : solve_assignment(cost).pairs) {
    out.push_back(FigureCaptionPair{figures[f], captions[c], cost[f][c]});
  }
  return out;
}

std::vector<GridPrediction> parse_grid_predictions_text(const std::string& text,
                                                        const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("malformed backend file " + origin + " at byte " +
                std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_array())
    throw Error("malformed backend file " + origin + ": expected an array");

  std::vector<GridPrediction> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = origin + " entry " + std::to_string(i);
    try {
      GridPrediction p;
      p.row = item.at("row").get<int>();
      p.col = item.at("col").get<int>();
      p.bbox = BBox{item.at("x1").get<double>(), item.at("y1").get<double>(),
                    item.at("x2").get<double>(), item.at("y2").get<double>()};
      p.confidence = item.at("confidence").get<double>();
      if (p.row < 0 || p.col < 0)
        throw Error("malformed backend file " + where + ": negative grid index");
      if (!p.bbox.valid())
        throw Error("malformed backend file " + where + ": degenerate box");
      if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
        throw Error("malformed backend file " + where + ": confidence outside [0,1]");
      out.push_back(p);
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed backend file " + where + ": " + e.what());
    }
  }
  return out;
}

std::vector<GridPrediction> parse_grid_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid_predictions_text(buf.str(), path.string());
}

std::vector<FigureCaptionPair> run_page(const std::filesystem::path& backend_file,
                                        std::span<const Paragraph> paragraphs,
                                        double confidence_threshold,
                                        double nms_iou) {
  const std::vector<GridPrediction> preds = parse_grid_predictions(backend_file);
  const std::vector<Detection> thresholded =
      threshold_detections(preds, confidence_threshold);
  const std::vector<Detection> figures = nms(thresholded, nms_iou);
  const std::vector<CaptionBlock> captions = detect_caption_blocks(paragraphs);
  return pair_figures_captions(figures, captions);
}

}  // namespace figlabel
