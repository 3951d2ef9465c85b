#pragma once

#include <optional>
#include <vector>

#include "ragwin/bm25.hpp"
#include "ragwin/corpus.hpp"

// Slices a ranked page list into contiguous windows for iterative prompting.
// Forward order walks pages by descending retrieval score, backward by
// ascending. A window is positive iff it contains a relevant page.
namespace ragwin {

enum class WindowOrder { forward, backward };
enum class WindowLabel { positive, negative };

struct WindowConfig {
  int windowSize = 60;
  WindowOrder order = WindowOrder::forward;
  std::optional<int> maxWindows;
};

struct Window {
  int ordinal = 0;  // 0-based position in iteration order
  std::vector<const Page*> pages;
  WindowLabel label = WindowLabel::negative;
};

// A page is relevant when its id appears in the example's gold page ids, or
// a normalized gold alias occurs as a substring of the normalized
// title + " " + content. Empty normalized aliases never match.
bool is_relevant_page(const Page& page, const QAExample& example);

// Consecutive windowSize-sized chunks of the ranked list in the configured
// order; the last window may be shorter; truncated to maxWindows when set.
// Throws when a ranked page id is missing from the corpus.
std::vector<Window> make_windows(const RankedList& ranked,
                                 const Corpus& corpus,
                                 const QAExample& example,
                                 const WindowConfig& cfg);

std::optional<int> first_positive_ordinal(const std::vector<Window>& windows);

// Number of negative windows before the first positive one; nullopt when no
// window is positive.
std::optional<int> negatives_before_first_positive(
    const std::vector<Window>& windows);

// First forward-order window of w consecutive ranked pages containing zero
// relevant pages; nullopt if every such window has a relevant page.
std::optional<Window> construct_negative_window(const RankedList& ranked,
                                                const Corpus& corpus,
                                                const QAExample& example,
                                                int w);

}  // namespace ragwin
