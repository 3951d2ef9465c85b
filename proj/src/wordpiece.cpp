#include "ragwin/wordpiece.hpp"

#include <fstream>
#include <stdexcept>

#include "ragwin/rng.hpp"
#include "ragwin/text.hpp"

namespace ragwin {

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  uint64_t fp = 0xCBF29CE484222325ULL;
  for (size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<int>(i));
    if (!inserted) {
      throw std::runtime_error("duplicate vocab token \"" + tokens_[i] + "\"");
    }
    fp = hash_mix(fp, fnv1a64(tokens_[i]));
  }
  fingerprint_ = fp;
  auto unk = index_.find(kUnknownToken);
  if (unk == index_.end()) {
    throw std::runtime_error("vocabulary lacks the unknown token \"[UNK]\"");
  }
  unk_id_ = unk->second;
}

int Vocab::id_of(std::string_view token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

Vocab load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open vocab file " + path.string());
  }
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocab(std::move(tokens));
}

std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  };
  for (char32_t cp : decode_utf8(text)) {
    if (is_control_cp(cp) || cp == 0) continue;
    if (is_space_cp(cp)) {
      flush();
      continue;
    }
    cp = strip_accent_cp(to_lower_cp(cp));
    if (cp == 0) continue;  // combining mark
    if (is_punct_cp(cp)) {
      flush();
      std::string punct;
      append_utf8(punct, cp);
      words.push_back(std::move(punct));
      continue;
    }
    append_utf8(current, cp);
  }
  flush();
  return words;
}

std::vector<std::string> wordpiece_word(std::string_view word,
                                        const Vocab& vocab) {
  // byte offsets of codepoint boundaries, so substrings never split a
  // multi-byte sequence
  std::vector<size_t> bounds;
  bounds.push_back(0);
  for (size_t i = 0; i < word.size();) {
    const auto b = static_cast<unsigned char>(word[i]);
    size_t len = 1;
    if ((b & 0xE0) == 0xC0) {
      len = 2;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4;
    }
    i = std::min(word.size(), i + len);
    bounds.push_back(i);
  }
  const size_t n_chars = bounds.size() - 1;
  const std::string unk(Vocab::kUnknownToken);
  if (n_chars == 0) return {};
  if (n_chars > kMaxWordChars) return {unk};

  std::vector<std::string> pieces;
  size_t start = 0;
  while (start < n_chars) {
    size_t end = n_chars;
    std::string match;
    while (start < end) {
      std::string candidate;
      if (start > 0) candidate = "##";
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      if (vocab.contains(candidate)) {
        match = std::move(candidate);
        break;
      }
      --end;
    }
    if (match.empty()) return {unk};
    pieces.push_back(std::move(match));
    start = end;
  }
  return pieces;
}

TokenSeq tokenize(std::string_view text, const Vocab& vocab) {
  TokenSeq seq;
  for (const std::string& word : basic_tokenize(text)) {
    for (std::string& piece : wordpiece_word(word, vocab)) {
      seq.ids.push_back(vocab.id_of(piece));
      seq.surface.push_back(std::move(piece));
    }
  }
  return seq;
}

long count_tokens(std::string_view text, const Vocab& vocab) {
  long count = 0;
  for (const std::string& word : basic_tokenize(text)) {
    count += static_cast<long>(wordpiece_word(word, vocab).size());
  }
  return count;
}

}  // namespace ragwin
