#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "figlabel/geometry.hpp"
#include "figlabel/labels.hpp"
#include "figlabel/raster.hpp"
#include "figlabel/template_match.hpp"
#include "figlabel/text_match.hpp"

namespace figlabel {

// One positioned token from the PDF text layer.
struct TextToken {
  std::string text;
  BBox bbox;
  int page_index = 0;
};

// Tokens of one page joined into a searchable string; ranges[i] is the char
// span of token i inside `text`.
struct JoinedPageText {
  std::string text;
  std::vector<std::pair<int, int>> ranges;
  std::vector<int> token_ids;  // indices into the flat token list
};

std::vector<JoinedPageText> join_pages(std::span<const TextToken> tokens,
                                       int page_count);

// Tokens whose char span intersects [start, end) of the joined text.
std::vector<int> tokens_in_span(const JoinedPageText& page, int start, int end);

struct TableLocation {
  int page_index = 0;
  BBox figure_box;
  BBox caption_box;
};

// Finds a table from its XML cells: the caption picks the page, the
// bag-of-words interval picks the token run, and the caption tokens give the
// caption box. Throws Error("caption not found") when the caption cannot be
// located.
TableLocation locate_table(std::span<const std::string> table_cells_text,
                           const std::string& caption_text,
                           std::span<const TextToken> tokens, int page_count);

// aux.json entries: figures carry an image file, tables carry cell text.
struct AuxFigure {
  std::string caption;
  std::string image_file;
};
struct AuxTable {
  std::string caption;
  std::vector<std::string> cells;
};
struct AuxManifest {
  std::vector<AuxFigure> figures;
  std::vector<AuxTable> tables;
};

AuxManifest parse_aux_manifest(const std::filesystem::path& path);
std::vector<TextToken> parse_tokens(const std::filesystem::path& path);

struct LocatedFigure {
  int page_index = 0;
  TemplateMatch match;
  std::optional<BBox> caption_box;
  std::string caption_text;
  int page_width = 0;
  int page_height = 0;
};
struct LocatedTable {
  int page_index = 0;
  BBox figure_box;
  BBox caption_box;
  std::string caption_text;
  int page_width = 0;
  int page_height = 0;
};

// Packages located figures and tables into label records with provenance
// xml. If any figure match scores below the acceptance threshold the whole
// paper is dropped (empty result).
std::vector<InducedLabel> assemble_xml_labels(const std::string& paper_id,
                                              std::span<const LocatedFigure> figures,
                                              std::span<const LocatedTable> tables,
                                              double dpi);

struct XmlPaperResult {
  std::vector<InducedLabel> labels;
  std::optional<std::string> skip_reason;  // "template-score", "caption-not-found"
};

// End-to-end induction for one paper directory holding page-%04d.png files,
// tokens.json and aux.json.
XmlPaperResult induce_xml_paper(const std::filesystem::path& paper_dir,
                                const std::string& paper_id, double dpi = 100.0);

}  // namespace figlabel
