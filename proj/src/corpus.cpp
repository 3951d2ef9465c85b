#include "ragwin/corpus.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace ragwin {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail_line(const std::filesystem::path& path, size_t line_no,
                            const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                           ": " + what);
}

std::string require_string(const json& rec, const char* key,
                           const std::filesystem::path& path, size_t line_no) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) {
    fail_line(path, line_no, std::string("missing or non-string field \"") +
                                 key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace

void Corpus::add(Page page) {
  if (page.id.empty()) {
    throw std::runtime_error("page with empty id");
  }
  auto [it, inserted] = by_id_.emplace(page.id, pages_.size());
  if (!inserted) {
    throw std::runtime_error("duplicate page id \"" + page.id + "\"");
  }
  pages_.push_back(std::move(page));
}

const Page* Corpus::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &pages_[it->second];
}

const Page& Corpus::at(const std::string& id) const {
  const Page* p = find(id);
  if (p == nullptr) {
    throw std::runtime_error("unknown page id \"" + id + "\"");
  }
  return *p;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open corpus file " + path.string());
  }
  Corpus corpus;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      fail_line(path, line_no, "malformed JSON record");
    }
    Page page;
    page.id = require_string(rec, "id", path, line_no);
    page.title = require_string(rec, "title", path, line_no);
    page.content = require_string(rec, "text", path, line_no);
    if (corpus.find(page.id) != nullptr) {
      fail_line(path, line_no, "duplicate page id \"" + page.id + "\"");
    }
    corpus.add(std::move(page));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write corpus file " + path.string());
  }
  for (const Page& page : corpus.pages()) {
    ordered_json rec;
    rec["id"] = page.id;
    rec["title"] = page.title;
    rec["text"] = page.content;
    out << rec.dump() << '\n';
  }
}

std::vector<QAExample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset file " + path.string());
  }
  std::vector<QAExample> examples;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      fail_line(path, line_no, "malformed JSON record");
    }
    QAExample ex;
    ex.id = require_string(rec, "id", path, line_no);
    ex.question = require_string(rec, "question", path, line_no);
    if (ex.question.empty()) {
      fail_line(path, line_no, "empty question");
    }
    auto ans = rec.find("answers");
    if (ans == rec.end() || !ans->is_array() || ans->empty()) {
      fail_line(path, line_no, "field \"answers\" must be a non-empty array");
    }
    for (const auto& a : *ans) {
      if (!a.is_string()) {
        fail_line(path, line_no, "non-string entry in \"answers\"");
      }
      ex.answers.push_back(a.get<std::string>());
    }
    if (auto gp = rec.find("gold_page_ids"); gp != rec.end()) {
      if (!gp->is_array()) {
        fail_line(path, line_no, "field \"gold_page_ids\" must be an array");
      }
      for (const auto& g : *gp) {
        if (!g.is_string()) {
          fail_line(path, line_no, "non-string entry in \"gold_page_ids\"");
        }
        ex.goldPageIds.push_back(g.get<std::string>());
      }
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

void save_dataset(const std::vector<QAExample>& dataset,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write dataset file " + path.string());
  }
  for (const QAExample& ex : dataset) {
    ordered_json rec;
    rec["id"] = ex.id;
    rec["question"] = ex.question;
    rec["answers"] = ex.answers;
    if (!ex.goldPageIds.empty()) {
      rec["gold_page_ids"] = ex.goldPageIds;
    }
    out << rec.dump() << '\n';
  }
}

ValidationReport validate_links(const Corpus& corpus,
                                const std::vector<QAExample>& dataset) {
  ValidationReport report;
  std::unordered_set<std::string> seen;
  for (const QAExample& ex : dataset) {
    for (const std::string& id : ex.goldPageIds) {
      if (corpus.find(id) == nullptr && seen.insert(id).second) {
        report.dangling.push_back(id);
      }
    }
  }
  return report;
}

}  // namespace ragwin
