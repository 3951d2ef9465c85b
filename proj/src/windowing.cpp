#include "ragwin/windowing.hpp"

#include <algorithm>
#include <stdexcept>

#include "ragwin/normalize.hpp"

namespace ragwin {

bool is_relevant_page(const Page& page, const QAExample& example) {
  for (const std::string& gold : example.goldPageIds) {
    if (gold == page.id) return true;
  }
  const std::string haystack = normalize_answer(page.title + " " + page.content);
  for (const std::string& alias : example.answers) {
    const std::string needle = normalize_answer(alias);
    if (needle.empty()) continue;
    if (haystack.find(needle) != std::string::npos) return true;
  }
  return false;
}

namespace {

std::vector<const Page*> resolve_pages(const RankedList& ranked,
                                       const Corpus& corpus) {
  std::vector<const Page*> pages;
  pages.reserve(ranked.entries.size());
  for (const ScoredEntry& entry : ranked.entries) {
    const Page* page = corpus.find(entry.pageId);
    if (page == nullptr) {
      throw std::runtime_error("ranked list references page id \"" +
                               entry.pageId + "\" missing from the corpus");
    }
    pages.push_back(page);
  }
  return pages;
}

WindowLabel label_of(const std::vector<const Page*>& pages,
                     const QAExample& example) {
  for (const Page* page : pages) {
    if (is_relevant_page(*page, example)) return WindowLabel::positive;
  }
  return WindowLabel::negative;
}

}  // namespace

std::vector<Window> make_windows(const RankedList& ranked,
                                 const Corpus& corpus,
                                 const QAExample& example,
                                 const WindowConfig& cfg) {
  if (cfg.windowSize < 1) {
    throw std::runtime_error("window size must be >= 1");
  }
  std::vector<const Page*> pages = resolve_pages(ranked, corpus);
  if (cfg.order == WindowOrder::backward) {
    std::reverse(pages.begin(), pages.end());
  }
  std::vector<Window> windows;
  const size_t w = static_cast<size_t>(cfg.windowSize);
  for (size_t start = 0; start < pages.size(); start += w) {
    if (cfg.maxWindows &&
        windows.size() >= static_cast<size_t>(*cfg.maxWindows)) {
      break;
    }
    Window window;
    window.ordinal = static_cast<int>(windows.size());
    const size_t end = std::min(pages.size(), start + w);
    window.pages.assign(pages.begin() + start, pages.begin() + end);
    window.label = label_of(window.pages, example);
    windows.push_back(std::move(window));
  }
  return windows;
}

std::optional<int> first_positive_ordinal(const std::vector<Window>& windows) {
  for (const Window& window : windows) {
    if (window.label == WindowLabel::positive) return window.ordinal;
  }
  return std::nullopt;
}

std::optional<int> negatives_before_first_positive(
    const std::vector<Window>& windows) {
  // every window before the first positive one is negative by definition
  return first_positive_ordinal(windows);
}

std::optional<Window> construct_negative_window(const RankedList& ranked,
                                                const Corpus& corpus,
                                                const QAExample& example,
                                                int w) {
  WindowConfig cfg;
  cfg.windowSize = w;
  cfg.order = WindowOrder::forward;
  for (Window& window : make_windows(ranked, corpus, example, cfg)) {
    if (window.label == WindowLabel::negative) return std::move(window);
  }
  return std::nullopt;
}

}  // namespace ragwin
