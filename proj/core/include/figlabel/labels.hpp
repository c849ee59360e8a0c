#pragma once

#include <optional>
#include <string>

#include "figlabel/geometry.hpp"

namespace figlabel {

enum class Kind { Figure, Table };

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& s);

enum class Provenance { Latex, Xml };

std::string to_string(Provenance p);

// One induced figure/table record: the dataset row produced by either
// induction route.
struct InducedLabel {
  std::string paper_id;
  int page_index = 0;
  Kind kind = Kind::Figure;
  BBox figure_box;
  std::optional<BBox> caption_box;
  std::optional<std::string> caption_text;
  std::optional<std::string> name;  // e.g. "Figure 1"
  double dpi = 100.0;
  int page_width = 0;
  int page_height = 0;
  Provenance provenance = Provenance::Latex;
};

}  // namespace figlabel
