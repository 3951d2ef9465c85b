#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ragwin/corpus.hpp"
#include "ragwin/wordpiece.hpp"

namespace ragwin::testing {

namespace fs = std::filesystem;

// Unique temp directory per test, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = fs::temp_directory_path() /
           ("ragwin_test_" + tag + "_" + std::to_string(counter_++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  const fs::path& path() const { return dir_; }
  fs::path file(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
  static inline int counter_ = 0;
};

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// Vocab whose entries are exactly the given words plus [UNK].
inline Vocab make_vocab(std::vector<std::string> words) {
  std::vector<std::string> tokens;
  tokens.emplace_back("[UNK]");
  for (auto& w : words) tokens.push_back(std::move(w));
  return Vocab(std::move(tokens));
}

inline Page make_page(std::string id, std::string title, std::string content) {
  return Page{std::move(id), std::move(title), std::move(content)};
}

inline QAExample make_example(std::string id, std::string question,
                              std::vector<std::string> answers,
                              std::vector<std::string> gold_ids = {}) {
  QAExample ex;
  ex.id = std::move(id);
  ex.question = std::move(question);
  ex.answers = std::move(answers);
  ex.goldPageIds = std::move(gold_ids);
  return ex;
}

}  // namespace ragwin::testing
