#include "figlabel/latex_induction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "figlabel/error.hpp"

namespace figlabel {

std::string to_string(ColorClass c) {
  switch (c) {
    case ColorClass::FigureFrame: return "figure-frame";
    case ColorClass::TableFrame: return "table-frame";
    case ColorClass::FigureName: return "figure-name";
    case ColorClass::CaptionText: return "caption-text";
  }
  return "?";
}

const std::string kFloatFramePreamble =
    "\\usepackage{color}\n"
    "\\usepackage{floatrow}\n"
    "\\usepackage{tcolorbox}\n"
    "\n"
    "\\DeclareColorBox{figurecolorbox}{\\fcolorbox{red}{white}}\n"
    "\\DeclareColorBox{tablecolorbox}{\\fcolorbox{yellow}{white}}\n"
    "\n"
    "\\floatsetup[figure]{framestyle=colorbox,\n"
    "    colorframeset=figurecolorbox, framearound=all,\n"
    "    frameset={\\fboxrule1pt\\fboxsep0pt}}\n"
    "\\floatsetup[table]{framestyle=colorbox,\n"
    "    colorframeset=tablecolorbox, framearound=all,\n"
    "    frameset={\\fboxrule1pt\\fboxsep0pt}}\n";

const std::string kCaptionColorPreamble =
    "\\usepackage[labelfont={color=green},\n"
    "    textfont={color=blue}]{caption} \n";

namespace {

bool line_conflicts(const std::string& line) {
  // Commands the injected block would fight with. \usepackage of floatrow or
  // caption changes float/caption layout; explicit float frame setup likewise.
  if (line.find("\\floatsetup") != std::string::npos) return true;
  if (line.find("\\DeclareColorBox") != std::string::npos) return true;
  const auto use = line.find("\\usepackage");
  if (use != std::string::npos) {
    const std::string rest = line.substr(use);
    if (rest.find("floatrow") != std::string::npos) return true;
    if (rest.find("{caption}") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

std::string inject_preamble(const std::string& latex_source) {
  const auto begin_doc = latex_source.find("\\begin{document}");
  if (begin_doc == std::string::npos ||
      latex_source.find("\\documentclass") == std::string::npos) {
    throw Error("not a main file");
  }

  // Only the preamble (before \begin{document}) can conflict.
  std::istringstream preamble(latex_source.substr(0, begin_doc));
  std::string line;
  int line_no = 0;
  while (std::getline(preamble, line)) {
    ++line_no;
    if (line_conflicts(line)) {
      throw Error("package conflict: line " + std::to_string(line_no) + ": " +
                  line);
    }
  }

  std::string injected;
  if (begin_doc > 0 && latex_source[begin_doc - 1] != '\n') injected = "\n";
  injected += kFloatFramePreamble;
  injected += "\n";
  injected += kCaptionColorPreamble;

  std::string out = latex_source;
  out.insert(begin_doc, injected);
  return out;
}

std::vector<std::uint8_t> diff_pages(const PageRaster& original,
                                     const PageRaster& modified,
                                     const LatexParams& params) {
  if (original.width != modified.width || original.height != modified.height ||
      original.dpi != modified.dpi) {
    throw Error("page mismatch");
  }
  std::vector<std::uint8_t> mask(
      static_cast<std::size_t>(original.width) * original.height, 0);
  const std::uint8_t* a = original.pixels.data();
  const std::uint8_t* b = modified.pixels.data();
  for (std::size_t i = 0; i < mask.size(); ++i, a += 3, b += 3) {
    const int d0 = std::abs(int(a[0]) - int(b[0]));
    const int d1 = std::abs(int(a[1]) - int(b[1]));
    const int d2 = std::abs(int(a[2]) - int(b[2]));
    mask[i] = std::max({d0, d1, d2}) > params.diff_tolerance ? 1 : 0;
  }
  return mask;
}

namespace {

struct ReferenceColor {
  ColorClass cls;
  double r, g, b;
};

constexpr std::array<ReferenceColor, 4> kReferenceColors{{
    {ColorClass::FigureFrame, 255, 0, 0},
    {ColorClass::TableFrame, 255, 255, 0},
    {ColorClass::FigureName, 0, 255, 0},
    {ColorClass::CaptionText, 0, 0, 255},
}};

}  // namespace

std::vector<DiffComponent> extract_components(
    const std::vector<std::uint8_t>& mask, const PageRaster& modified,
    const LatexParams& params) {
  const int w = modified.width;
  const int h = modified.height;
  if (mask.size() != static_cast<std::size_t>(w) * h)
    throw Error("page mismatch");

  const double dpi_factor = modified.dpi / 100.0;
  const double min_size =
      params.min_component_size_at_100dpi * dpi_factor * dpi_factor;

  std::vector<std::uint8_t> visited(mask.size(), 0);
  std::vector<std::size_t> stack;
  std::vector<DiffComponent> out;

  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const std::size_t start = static_cast<std::size_t>(sy) * w + sx;
      if (!mask[start] || visited[start]) continue;

      long count = 0;
      int min_x = sx, max_x = sx, min_y = sy, max_y = sy;
      double sum_r = 0, sum_g = 0, sum_b = 0;
      visited[start] = 1;
      stack.push_back(start);
      while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(idx % w);
        const int y = static_cast<int>(idx / w);
        ++count;
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
        const auto rgb = modified.at(x, y);
        sum_r += rgb[0];
        sum_g += rgb[1];
        sum_b += rgb[2];
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
            if (mask[nidx] && !visited[nidx]) {
              visited[nidx] = 1;
              stack.push_back(nidx);
            }
          }
        }
      }

      if (count < min_size) continue;

      const double mean_r = sum_r / count;
      const double mean_g = sum_g / count;
      const double mean_b = sum_b / count;
      double best_dist = std::numeric_limits<double>::infinity();
      ColorClass best_cls = ColorClass::FigureFrame;
      for (const auto& ref : kReferenceColors) {
        const double d = std::hypot(mean_r - ref.r, mean_g - ref.g, mean_b - ref.b);
        if (d < best_dist) {
          best_dist = d;
          best_cls = ref.cls;
        }
      }
      if (best_dist > params.color_tolerance) continue;

      // Pixels are unit squares, so the box spans [min, max + 1).
      out.push_back(DiffComponent{
          BBox{double(min_x), double(min_y), double(max_x + 1), double(max_y + 1)},
          best_cls, count});
    }
  }
  return out;
}

BBox carve_caption(const BBox& float_box, std::span<const BBox> caption_boxes) {
  if (caption_boxes.empty()) return float_box;
  const BBox captions = enclosing_box(caption_boxes);

  const std::array<BBox, 4> bands{{
      {float_box.x1, float_box.y1, float_box.x2, std::min(captions.y1, float_box.y2)},
      {float_box.x1, std::max(captions.y2, float_box.y1), float_box.x2, float_box.y2},
      {float_box.x1, float_box.y1, std::min(captions.x1, float_box.x2), float_box.y2},
      {std::max(captions.x2, float_box.x1), float_box.y1, float_box.x2, float_box.y2},
  }};

  const BBox* best = nullptr;
  for (const BBox& band : bands) {
    if (!band.valid()) continue;
    if (!best || band.area() > best->area()) best = &band;
  }
  if (!best) throw Error("caption covers float");
  return *best;
}

namespace {

bool is_frame(const DiffComponent& c) {
  return c.color_class == ColorClass::FigureFrame ||
         c.color_class == ColorClass::TableFrame;
}

// Union-find over caption components.
int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

bool captions_adjacent(const BBox& a, const BBox& b, double max_gap) {
  const double vertical_gap =
      std::max(0.0, std::max(a.y1, b.y1) - std::min(a.y2, b.y2));
  const bool horizontal_overlap = a.x1 < b.x2 && b.x1 < a.x2;
  return vertical_gap <= max_gap && horizontal_overlap;
}

}  // namespace

std::vector<InducedLabel> assemble_labels(const std::string& paper_id,
                                          int page_index,
                                          std::span<const DiffComponent> components,
                                          const PageRaster& page,
                                          const LatexParams& params) {
  std::vector<const DiffComponent*> frames;
  std::vector<const DiffComponent*> caption_parts;
  for (const DiffComponent& c : components) {
    (is_frame(c) ? frames : caption_parts).push_back(&c);
  }

  // Merge caption parts (figure names and caption text) into groups.
  const double max_gap = params.caption_merge_gap * page.height;
  std::vector<int> parent(caption_parts.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < caption_parts.size(); ++i) {
    for (std::size_t j = i + 1; j < caption_parts.size(); ++j) {
      if (captions_adjacent(caption_parts[i]->bbox, caption_parts[j]->bbox,
                            max_gap)) {
        parent[find_root(parent, int(i))] = find_root(parent, int(j));
      }
    }
  }
  std::vector<std::vector<BBox>> groups;
  {
    std::vector<int> group_of(caption_parts.size(), -1);
    for (std::size_t i = 0; i < caption_parts.size(); ++i) {
      const int root = find_root(parent, int(i));
      if (group_of[root] < 0) {
        group_of[root] = static_cast<int>(groups.size());
        groups.emplace_back();
      }
      groups[group_of[root]].push_back(caption_parts[i]->bbox);
    }
  }

  // Assign caption groups to frames by center distance.
  std::vector<int> group_of_frame(frames.size(), -1);
  if (!frames.empty() && !groups.empty()) {
    std::vector<std::vector<double>> cost(frames.size(),
                                          std::vector<double>(groups.size()));
    for (std::size_t f = 0; f < frames.size(); ++f) {
      for (std::size_t g = 0; g < groups.size(); ++g) {
        cost[f][g] = distance(center(frames[f]->bbox),
                              center(enclosing_box(std::span(groups[g]))));
      }
    }
    for (const auto& [f, g] : solve_assignment(cost).pairs) {
      group_of_frame[f] = g;
    }
  }

  std::vector<InducedLabel> labels;
  labels.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    InducedLabel label;
    label.paper_id = paper_id;
    label.page_index = page_index;
    label.kind = frames[f]->color_class == ColorClass::TableFrame ? Kind::Table
                                                                  : Kind::Figure;
    label.dpi = page.dpi;
    label.page_width = page.width;
    label.page_height = page.height;
    label.provenance = Provenance::Latex;
    if (group_of_frame[f] >= 0) {
      const auto& group = groups[group_of_frame[f]];
      label.figure_box = carve_caption(frames[f]->bbox, std::span(group));
      label.caption_box = enclosing_box(std::span(group));
    } else {
      label.figure_box = frames[f]->bbox;
    }
    labels.push_back(std::move(label));
  }
  return labels;
}

}  // namespace figlabel
