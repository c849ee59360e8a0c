#pragma once

#include "figlabel/geometry.hpp"
#include "figlabel/raster.hpp"

namespace figlabel {

// Best placement of a template on a page. score is the mean-normalized
// cross-correlation in [-1, 1]; scale is the ratio of the template's largest
// dimension to the matching page dimension.
struct TemplateMatch {
  BBox bbox;
  double score = 0.0;
  double scale = 0.0;
};

inline constexpr int kTemplateScaleCount = 45;
inline constexpr double kTemplateScaleMin = 0.10;
inline constexpr double kTemplateScaleMax = 0.95;

// The k-th of the 45 linearly spaced scales in [0.10, 0.95].
double template_scale(int k);

// Sweeps the 45 scales; at each, the template is resized so its largest
// dimension covers scale * the corresponding page dimension, and the
// mean-normalized cross-correlation is evaluated at every placement:
//   NCC = sum(T' * W') / sqrt(sum(T'^2) * sum(W'^2))
// with T', W' the mean-subtracted template and window. Zero-variance windows
// or templates score 0. Ties go to the smaller scale, then the top-left
// placement.
TemplateMatch match_template_multiscale(const GrayImage& page_gray,
                                        const GrayImage& template_gray);

// A figure match is accepted iff its score reaches 0.8; below that the whole
// paper is excluded from the induced dataset.
bool accept_figure_match(const TemplateMatch& m);

inline constexpr double kFigureMatchThreshold = 0.8;

}  // namespace figlabel
