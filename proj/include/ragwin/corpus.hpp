#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

// Document collection and QA dataset loading. Both file formats are UTF-8
// line-delimited JSON records:
//   corpus:  {"id": ..., "title": ..., "text": ...}
//   dataset: {"id": ..., "question": ..., "answers": [...],
//             "gold_page_ids": [...]}   (gold_page_ids optional)
namespace ragwin {

struct Page {
  std::string id;
  std::string title;
  std::string content;
};

class Corpus {
 public:
  // Throws on duplicate id or empty id.
  void add(Page page);

  const std::vector<Page>& pages() const { return pages_; }
  size_t size() const { return pages_.size(); }
  bool empty() const { return pages_.empty(); }

  const Page* find(const std::string& id) const;
  // Throws if the id is unknown.
  const Page& at(const std::string& id) const;

 private:
  std::vector<Page> pages_;
  std::unordered_map<std::string, size_t> by_id_;
};

struct QAExample {
  std::string id;
  std::string question;
  std::vector<std::string> answers;      // gold aliases, never empty
  std::vector<std::string> goldPageIds;  // may be empty
};

struct ValidationReport {
  // gold page ids referenced by the dataset but absent from the corpus,
  // in first-seen order, deduplicated
  std::vector<std::string> dangling;
  bool ok() const { return dangling.empty(); }
};

Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

std::vector<QAExample> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::vector<QAExample>& dataset,
                  const std::filesystem::path& path);

ValidationReport validate_links(const Corpus& corpus,
                                const std::vector<QAExample>& dataset);

}  // namespace ragwin
