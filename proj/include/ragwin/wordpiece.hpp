#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// WordPiece tokenizer over a fixed vocabulary (BERT vocab.txt convention:
// one token per line, line number = token id). Used both for BM25 term
// extraction and for prompt token accounting; all token counts reported by
// this project are wordpiece tokens.
namespace ragwin {

class Vocab {
 public:
  static constexpr std::string_view kUnknownToken = "[UNK]";

  Vocab() = default;
  explicit Vocab(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const { return tokens_; }
  size_t size() const { return tokens_.size(); }

  // -1 if the token is not in the vocabulary.
  int id_of(std::string_view token) const;
  bool contains(std::string_view token) const { return id_of(token) >= 0; }
  int unk_id() const { return unk_id_; }

  // FNV-1a over all tokens; stored in index manifests so a mismatched
  // vocabulary is detectable.
  uint64_t fingerprint() const { return fingerprint_; }

 private:
  struct StringHash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  struct StringEq {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const {
      return a == b;
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int, StringHash, StringEq> index_;
  int unk_id_ = -1;
  uint64_t fingerprint_ = 0;
};

Vocab load_vocab(const std::filesystem::path& path);

// Lowercases, strips accents and control characters, splits on whitespace,
// and splits every punctuation character into its own word.
std::vector<std::string> basic_tokenize(std::string_view text);

// Greedy longest-match-first subword split of a single word. Continuation
// pieces carry the "##" prefix. Words with an unmatchable position, or
// longer than kMaxWordChars codepoints, map to ["[UNK]"].
inline constexpr size_t kMaxWordChars = 100;
std::vector<std::string> wordpiece_word(std::string_view word,
                                        const Vocab& vocab);

struct TokenSeq {
  std::vector<int> ids;
  std::vector<std::string> surface;
  size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

TokenSeq tokenize(std::string_view text, const Vocab& vocab);
long count_tokens(std::string_view text, const Vocab& vocab);

}  // namespace ragwin
