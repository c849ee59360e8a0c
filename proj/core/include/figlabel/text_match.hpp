#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace figlabel {

// Best approximate occurrence of a needle inside a haystack;
// haystack[start, end) achieves the minimal edit distance.
struct FuzzyMatch {
  int start = 0;
  int end = 0;  // exclusive
  int distance = 0;
};

// Token interval [start_token, end_token] minimizing the bag-of-words
// distance to a word multiset.
struct IntervalMatch {
  int start_token = 0;
  int end_token = 0;  // inclusive
  int distance = 0;
};

// Minimum Levenshtein distance between the needle and any substring of the
// haystack, found by Wagner-Fischer with a zero-cost start: the first DP row
// is initialized to zero and the answer is read off the minimum of the last
// row, keeping the O(mn) complexity of the plain edit distance. Ties are
// broken by the smallest end, then the smallest span length.
FuzzyMatch fuzzy_substring(std::string_view needle, std::string_view haystack);

// Runs fuzzy_substring against every page and returns the best page (ties to
// the earliest). Throws Error("caption not found") when even the best page's
// distance exceeds half the caption length.
std::pair<int, FuzzyMatch> locate_caption_page(
    std::string_view caption_text, std::span<const std::string> pages);

// Sliding word-difference counter over all token intervals: starting from
// the table's word multiset, each consumed token either pays off one table
// word or adds one surplus token. The first interval (in start-ascending,
// end-ascending order) with the strictly smallest distance wins.
IntervalMatch bag_of_words_interval(std::span<const std::string> table_words,
                                    std::span<const std::string> page_tokens);

// Shared token normalization: whitespace split (for free text), surrounding
// punctuation stripped, ASCII case-folded.
std::string normalize_token(std::string_view raw);
std::vector<std::string> tokenize(std::string_view text);

}  // namespace figlabel
