#pragma once

#include <string>
#include <vector>

#include "figlabel/geometry.hpp"
#include "figlabel/labels.hpp"
#include "figlabel/raster.hpp"

namespace figlabel {

// Color classes drawn by the injected preamble: figure frames render red,
// table frames yellow, figure names green and caption text blue.
enum class ColorClass { FigureFrame, TableFrame, FigureName, CaptionText };

std::string to_string(ColorClass c);

// One 8-connected region of changed pixels.
struct DiffComponent {
  BBox bbox;
  ColorClass color_class = ColorClass::FigureFrame;
  long pixel_count = 0;
};

struct LatexParams {
  // Per-channel threshold for a pixel to count as changed; absorbs
  // anti-aliasing noise around 1-pt rules.
  int diff_tolerance = 8;
  // Minimum component size in pixels at 100 dpi; scales with dpi squared.
  double min_component_size_at_100dpi = 20.0;
  // Maximum RGB distance from a reference color before a component is
  // discarded as unclassifiable.
  double color_tolerance = 120.0;
  // Caption grouping: maximum vertical gap between merged components as a
  // fraction of the page height.
  double caption_merge_gap = 0.02;
};

// The exact LaTeX header block that frames floats and colors captions.
extern const std::string kFloatFramePreamble;
extern const std::string kCaptionColorPreamble;

// Inserts the framing and caption-coloring commands immediately before
// \begin{document}. Throws Error("not a main file") when the source lacks a
// document class or \begin{document}, and Error("package conflict: ...")
// when the source already configures floatrow/caption in a conflicting way.
std::string inject_preamble(const std::string& latex_source);

// Per-pixel change mask between two renderings of the same page; true where
// any channel differs by more than params.diff_tolerance. Throws
// Error("page mismatch") on differing dimensions or dpi.
std::vector<std::uint8_t> diff_pages(const PageRaster& original,
                                     const PageRaster& modified,
                                     const LatexParams& params = {});

// 8-connected components of the mask, classified by the nearest reference
// color to their mean RGB in the modified page. Small or off-color
// components are dropped.
std::vector<DiffComponent> extract_components(
    const std::vector<std::uint8_t>& mask, const PageRaster& modified,
    const LatexParams& params = {});

// Largest axis-aligned band of float_box whose interior avoids every caption
// box: the best of the four bands around the captions' enclosing box.
// Returns float_box unchanged when caption_boxes is empty; throws
// Error("caption covers float") when no positive-area band remains.
BBox carve_caption(const BBox& float_box, std::span<const BBox> caption_boxes);

// Turns one page's diff components into labels: frames become records,
// caption groups are merged and assigned to frames by center distance, and
// each figure box is carved to exclude its caption.
std::vector<InducedLabel> assemble_labels(const std::string& paper_id,
                                          int page_index,
                                          std::span<const DiffComponent> components,
                                          const PageRaster& page,
                                          const LatexParams& params = {});

}  // namespace figlabel
