#include "figlabel/text_match.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <unordered_map>

#include "figlabel/error.hpp"

namespace figlabel {

FuzzyMatch fuzzy_substring(std::string_view needle, std::string_view haystack) {
  const int m = static_cast<int>(needle.size());
  const int n = static_cast<int>(haystack.size());
  if (m == 0) return FuzzyMatch{0, 0, 0};

  // dist[j]: edit distance of the needle prefix against the best-starting
  // substring ending at j. start[j]: where that substring starts; when costs
  // tie we keep the largest start so the final span is the shortest one.
  std::vector<int> dist(n + 1), prev_dist(n + 1);
  std::vector<int> start(n + 1), prev_start(n + 1);
  for (int j = 0; j <= n; ++j) {
    prev_dist[j] = 0;
    prev_start[j] = j;
  }

  for (int i = 1; i <= m; ++i) {
    dist[0] = i;
    start[0] = 0;
    for (int j = 1; j <= n; ++j) {
      const int subst = prev_dist[j - 1] + (needle[i - 1] == haystack[j - 1] ? 0 : 1);
      const int del = prev_dist[j] + 1;
      const int ins = dist[j - 1] + 1;
      int best = subst;
      int best_start = prev_start[j - 1];
      if (del < best || (del == best && prev_start[j] > best_start)) {
        best = del;
        best_start = prev_start[j];
      }
      if (ins < best || (ins == best && start[j - 1] > best_start)) {
        best = ins;
        best_start = start[j - 1];
      }
      dist[j] = best;
      start[j] = best_start;
    }
    std::swap(dist, prev_dist);
    std::swap(start, prev_start);
  }

  FuzzyMatch out{prev_start[0], 0, prev_dist[0]};
  for (int j = 1; j <= n; ++j) {
    if (prev_dist[j] < out.distance) {
      out.distance = prev_dist[j];
      out.end = j;
      out.start = prev_start[j];
    }
  }
  return out;
}

std::pair<int, FuzzyMatch> locate_caption_page(
    std::string_view caption_text, std::span<const std::string> pages) {
  if (pages.empty()) throw Error("caption not found: no pages");
  if (caption_text.empty()) throw Error("caption not found: empty caption");

  int best_page = 0;
  FuzzyMatch best = fuzzy_substring(caption_text, pages[0]);
  for (int p = 1; p < static_cast<int>(pages.size()); ++p) {
    const FuzzyMatch m = fuzzy_substring(caption_text, pages[p]);
    if (m.distance < best.distance) {
      best = m;
      best_page = p;
    }
  }
  const double normalized =
      static_cast<double>(best.distance) / static_cast<double>(caption_text.size());
  if (normalized > 0.5) throw Error("caption not found");
  return {best_page, best};
}

IntervalMatch bag_of_words_interval(std::span<const std::string> table_words,
                                    std::span<const std::string> page_tokens) {
  if (table_words.empty() || page_tokens.empty())
    throw Error("empty bag-of-words input");

  std::unordered_map<std::string_view, int> table_counter;
  for (const std::string& w : table_words) ++table_counter[w];
  const int total = static_cast<int>(table_words.size());
  const int n = static_cast<int>(page_tokens.size());

  int best_dist = std::numeric_limits<int>::max();
  IntervalMatch best{0, 0, 0};
  std::unordered_map<std::string_view, int> counter;
  for (int start = 0; start < n; ++start) {
    counter = table_counter;
    int cur_dist = total;
    for (int end = start; end < n; ++end) {
      int& c = counter[std::string_view(page_tokens[end])];
      --c;
      if (c >= 0) {
        --cur_dist;
      } else {
        ++cur_dist;
      }
      if (cur_dist < best_dist) {
        best_dist = cur_dist;
        best = IntervalMatch{start, end, cur_dist};
      }
    }
  }
  return best;
}

std::string normalize_token(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && std::ispunct(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && std::ispunct(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string token = normalize_token(text.substr(i, j - i));
      if (!token.empty()) out.push_back(std::move(token));
    }
    i = j;
  }
  return out;
}

}  // namespace figlabel
