#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ragwin/corpus.hpp"
#include "ragwin/wordpiece.hpp"

// Whole-page inverted index with BM25 scoring. Pages are indexed as
// title + " " + content, tokenized by WordPiece; no passage segmentation.
namespace ragwin {

struct BM25Params {
  double k1 = 0.9;  // term-frequency saturation
  double b = 0.8;   // length normalization
};

struct RetrievalConfig {
  int topK = 200;
};

struct Posting {
  uint32_t doc;  // page ordinal (ingestion order)
  uint32_t tf;
};

struct ScoredEntry {
  std::string pageId;
  double score;
};

struct RankedList {
  std::string questionId;
  std::vector<ScoredEntry> entries;  // scores non-increasing, ids distinct
};

class Index {
 public:
  Index() = default;

  long docCount() const { return static_cast<long>(doc_len_.size()); }
  double avgdl() const { return avgdl_; }
  const BM25Params& params() const { return params_; }
  uint32_t docLength(uint32_t ordinal) const { return doc_len_[ordinal]; }
  const std::string& pageId(uint32_t ordinal) const {
    return page_ids_[ordinal];
  }
  const std::vector<std::string>& pageIds() const { return page_ids_; }
  uint64_t vocabFingerprint() const { return vocab_fingerprint_; }

  long documentFrequency(int termId) const;
  const std::vector<Posting>& postings(int termId) const;
  size_t termCount() const { return postings_.size(); }
  // number of terms with at least one posting
  long distinctTerms() const;

 private:
  friend Index build_index(const Corpus&, const Vocab&, const BM25Params&);
  friend Index load_index(const std::filesystem::path&);

  std::vector<std::vector<Posting>> postings_;  // dense, one slot per term id
  std::vector<uint32_t> doc_len_;
  std::vector<std::string> page_ids_;
  double avgdl_ = 0.0;
  BM25Params params_;
  uint64_t vocab_fingerprint_ = 0;
};

// Throws on an empty corpus.
Index build_index(const Corpus& corpus, const Vocab& vocab,
                  const BM25Params& params);

// ln(1 + (N - df + 0.5) / (df + 0.5)); strictly positive for df <= N.
double idf(long df, long docCount);
double idf(int termId, const Index& index);

// Sum of per-term BM25 contributions of queryTokens against one page,
// accumulated in query-occurrence order.
double score(const TokenSeq& queryTokens, uint32_t pageOrdinal,
             const Index& index);

// Top-K pages by score, descending; ties broken by ascending page ordinal;
// zero-score pages excluded. A question tokenizing to nothing yields an
// empty list.
RankedList retrieve(const std::string& question, const Index& index,
                    const Vocab& vocab, const RetrievalConfig& config,
                    const std::string& questionId = {});

// 1 iff any of the first min(k, |entries|) pages is relevant to the example
// (relevance per is_relevant_page).
int recall_at_k(const RankedList& ranked, const QAExample& example, int k,
                const Corpus& corpus);

// On-disk layout documented in docs/formats.md (manifest.json + binary
// postings / doc-length files, little-endian, format version checked on
// load).
void save_index(const Index& index, const std::filesystem::path& dir);
Index load_index(const std::filesystem::path& dir);

}  // namespace ragwin
