#include "figlabel/xml_induction.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "figlabel/detection.hpp"
#include "figlabel/error.hpp"

namespace figlabel {

std::vector<JoinedPageText> join_pages(std::span<const TextToken> tokens,
                                       int page_count) {
  std::vector<JoinedPageText> pages(page_count);
  for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
    const TextToken& tok = tokens[i];
    if (tok.page_index < 0 || tok.page_index >= page_count)
      throw Error("token page index out of range: " + std::to_string(tok.page_index));
    JoinedPageText& page = pages[tok.page_index];
    if (!page.text.empty()) page.text.push_back(' ');
    const int start = static_cast<int>(page.text.size());
    page.text += tok.text;
    page.ranges.emplace_back(start, static_cast<int>(page.text.size()));
    page.token_ids.push_back(i);
  }
  return pages;
}

std::vector<int> tokens_in_span(const JoinedPageText& page, int start, int end) {
  std::vector<int> out;
  for (std::size_t i = 0; i < page.ranges.size(); ++i) {
    const auto [tok_start, tok_end] = page.ranges[i];
    if (tok_start < end && start < tok_end) out.push_back(page.token_ids[i]);
  }
  return out;
}

namespace {

std::vector<std::string> page_texts(std::span<const JoinedPageText> pages) {
  std::vector<std::string> out;
  out.reserve(pages.size());
  for (const JoinedPageText& p : pages) out.push_back(p.text);
  return out;
}

BBox enclosing_token_box(std::span<const TextToken> tokens,
                         std::span<const int> ids) {
  std::vector<BBox> boxes;
  boxes.reserve(ids.size());
  for (int id : ids) boxes.push_back(tokens[id].bbox);
  return enclosing_box(std::span<const BBox>(boxes));
}

}  // namespace

TableLocation locate_table(std::span<const std::string> table_cells_text,
                           const std::string& caption_text,
                           std::span<const TextToken> tokens, int page_count) {
  if (table_cells_text.empty()) throw Error("empty table cells");

  const std::vector<JoinedPageText> pages = join_pages(tokens, page_count);
  const std::vector<std::string> texts = page_texts(pages);
  const auto [page_index, caption_match] =
      locate_caption_page(caption_text, std::span<const std::string>(texts));
  const JoinedPageText& page = pages[page_index];

  const std::vector<int> caption_ids =
      tokens_in_span(page, caption_match.start, caption_match.end);
  if (caption_ids.empty()) throw Error("caption not found");

  std::vector<std::string> table_words;
  for (const std::string& cell : table_cells_text) {
    for (std::string& w : tokenize(cell)) table_words.push_back(std::move(w));
  }
  if (table_words.empty()) throw Error("empty table cells");

  std::vector<std::string> page_token_words;
  page_token_words.reserve(page.token_ids.size());
  for (int id : page.token_ids) {
    page_token_words.push_back(normalize_token(tokens[id].text));
  }
  const IntervalMatch interval = bag_of_words_interval(
      std::span<const std::string>(table_words),
      std::span<const std::string>(page_token_words));

  std::vector<int> table_ids(
      page.token_ids.begin() + interval.start_token,
      page.token_ids.begin() + interval.end_token + 1);

  return TableLocation{page_index, enclosing_token_box(tokens, table_ids),
                       enclosing_token_box(tokens, caption_ids)};
}

namespace {

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("malformed manifest " + path.string() + " at byte " +
                std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace

AuxManifest parse_aux_manifest(const std::filesystem::path& path) {
  const nlohmann::json doc = parse_json_file(path);
  if (!doc.is_array())
    throw Error("malformed manifest " + path.string() + ": expected an array");

  AuxManifest manifest;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = path.string() + " entry " + std::to_string(i);
    try {
      const std::string type = item.at("type").get<std::string>();
      const std::string caption = item.at("caption").get<std::string>();
      if (type == "figure") {
        manifest.figures.push_back(
            AuxFigure{caption, item.at("image_file").get<std::string>()});
      } else if (type == "table") {
        manifest.tables.push_back(
            AuxTable{caption, item.at("cells").get<std::vector<std::string>>()});
      } else {
        throw Error("malformed manifest " + where + ": unknown type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed manifest " + where + ": " + e.what());
    }
  }
  return manifest;
}

std::vector<TextToken> parse_tokens(const std::filesystem::path& path) {
  const nlohmann::json doc = parse_json_file(path);
  if (!doc.is_array())
    throw Error("malformed manifest " + path.string() + ": expected an array");

  std::vector<TextToken> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = path.string() + " entry " + std::to_string(i);
    try {
      TextToken tok;
      tok.text = item.at("text").get<std::string>();
      tok.page_index = item.at("page").get<int>();
      tok.bbox = BBox{item.at("x1").get<double>(), item.at("y1").get<double>(),
                      item.at("x2").get<double>(), item.at("y2").get<double>()};
      if (tok.text.empty())
        throw Error("malformed manifest " + where + ": empty token text");
      if (!tok.bbox.valid())
        throw Error("malformed manifest " + where + ": degenerate box");
      if (tok.page_index < 0)
        throw Error("malformed manifest " + where + ": negative page");
      out.push_back(std::move(tok));
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed manifest " + where + ": " + e.what());
    }
  }
  return out;
}

std::vector<InducedLabel> assemble_xml_labels(const std::string& paper_id,
                                              std::span<const LocatedFigure> figures,
                                              std::span<const LocatedTable> tables,
                                              double dpi) {
  for (const LocatedFigure& fig : figures) {
    if (!accept_figure_match(fig.match)) return {};
  }

  std::vector<InducedLabel> labels;
  labels.reserve(figures.size() + tables.size());
  for (const LocatedFigure& fig : figures) {
    InducedLabel label;
    label.paper_id = paper_id;
    label.page_index = fig.page_index;
    label.kind = Kind::Figure;
    label.figure_box = fig.match.bbox;
    label.caption_box = fig.caption_box;
    label.caption_text = fig.caption_text;
    label.dpi = dpi;
    label.page_width = fig.page_width;
    label.page_height = fig.page_height;
    label.provenance = Provenance::Xml;
    Kind kind;
    std::string number;
    if (parse_caption_header(fig.caption_text, &kind, &number)) {
      label.name = (kind == Kind::Table ? "Table " : "Figure ") + number;
    }
    labels.push_back(std::move(label));
  }
  for (const LocatedTable& tab : tables) {
    InducedLabel label;
    label.paper_id = paper_id;
    label.page_index = tab.page_index;
    label.kind = Kind::Table;
    label.figure_box = tab.figure_box;
    label.caption_box = tab.caption_box;
    label.caption_text = tab.caption_text;
    label.dpi = dpi;
    label.page_width = tab.page_width;
    label.page_height = tab.page_height;
    label.provenance = Provenance::Xml;
    Kind kind;
    std::string number;
    if (parse_caption_header(tab.caption_text, &kind, &number)) {
      label.name = (kind == Kind::Table ? "Table " : "Figure ") + number;
    }
    labels.push_back(std::move(label));
  }
  return labels;
}

XmlPaperResult induce_xml_paper(const std::filesystem::path& paper_dir,
                                const std::string& paper_id, double dpi) {
  const std::vector<TextToken> tokens = parse_tokens(paper_dir / "tokens.json");
  const AuxManifest manifest = parse_aux_manifest(paper_dir / "aux.json");
  const int page_count = count_page_files(paper_dir);

  const std::vector<JoinedPageText> pages =
      join_pages(std::span<const TextToken>(tokens), page_count);
  const std::vector<std::string> texts = page_texts(pages);

  std::map<int, PageRaster> raster_cache;
  auto load_page = [&](int index) -> const PageRaster& {
    auto it = raster_cache.find(index);
    if (it == raster_cache.end()) {
      it = raster_cache
               .emplace(index, read_png(paper_dir / page_file_name(index), dpi))
               .first;
    }
    return it->second;
  };

  XmlPaperResult result;
  std::vector<LocatedFigure> figures;
  std::vector<LocatedTable> tables;
  try {
    for (const AuxFigure& aux : manifest.figures) {
      const auto [page_index, caption_match] = locate_caption_page(
          aux.caption, std::span<const std::string>(texts));
      const PageRaster& page = load_page(page_index);
      const PageRaster figure_image = read_png(paper_dir / aux.image_file, dpi);
      const TemplateMatch match =
          match_template_multiscale(luminance(page), luminance(figure_image));
      if (!accept_figure_match(match)) {
        result.skip_reason = "template-score";
        return result;
      }
      LocatedFigure fig;
      fig.page_index = page_index;
      fig.match = match;
      const std::vector<int> caption_ids = tokens_in_span(
          pages[page_index], caption_match.start, caption_match.end);
      if (!caption_ids.empty()) {
        std::vector<BBox> boxes;
        for (int id : caption_ids) boxes.push_back(tokens[id].bbox);
        fig.caption_box = enclosing_box(std::span<const BBox>(boxes));
      }
      fig.caption_text = aux.caption;
      fig.page_width = page.width;
      fig.page_height = page.height;
      figures.push_back(std::move(fig));
    }
    for (const AuxTable& aux : manifest.tables) {
      const TableLocation loc =
          locate_table(std::span<const std::string>(aux.cells), aux.caption,
                       std::span<const TextToken>(tokens), page_count);
      const PageRaster& page = load_page(loc.page_index);
      tables.push_back(LocatedTable{loc.page_index, loc.figure_box,
                                    loc.caption_box, aux.caption, page.width,
                                    page.height});
    }
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with("caption not found")) {
      result.skip_reason = "caption-not-found";
      return result;
    }
    throw;
  }

  result.labels = assemble_xml_labels(
      paper_id, std::span<const LocatedFigure>(figures),
      std::span<const LocatedTable>(tables), dpi);
  return result;
}

}  // namespace figlabel
