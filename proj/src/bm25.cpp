#include "ragwin/bm25.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ragwin/windowing.hpp"

static_assert(std::endian::native == std::endian::little,
              "index files are little-endian");

namespace ragwin {

namespace {

constexpr const char* kFormatVersion = "ragwin-index-v1";

const std::vector<Posting> kEmptyPostings;

double term_contribution(uint32_t tf, double idf_t, uint32_t doc_len,
                         double avgdl, const BM25Params& p) {
  const double tf_d = static_cast<double>(tf);
  const double norm =
      1.0 - p.b + p.b * (static_cast<double>(doc_len) / avgdl);
  return idf_t * (tf_d * (p.k1 + 1.0)) / (tf_d + p.k1 * norm);
}

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw std::runtime_error("corrupt or truncated index file " +
                             path.string());
  }
  return value;
}

}  // namespace

long Index::documentFrequency(int termId) const {
  if (termId < 0 || static_cast<size_t>(termId) >= postings_.size()) return 0;
  return static_cast<long>(postings_[termId].size());
}

const std::vector<Posting>& Index::postings(int termId) const {
  if (termId < 0 || static_cast<size_t>(termId) >= postings_.size()) {
    return kEmptyPostings;
  }
  return postings_[termId];
}

long Index::distinctTerms() const {
  long n = 0;
  for (const auto& pl : postings_) {
    if (!pl.empty()) ++n;
  }
  return n;
}

Index build_index(const Corpus& corpus, const Vocab& vocab,
                  const BM25Params& params) {
  if (corpus.empty()) {
    throw std::runtime_error("cannot build an index over an empty corpus");
  }
  Index index;
  index.params_ = params;
  index.vocab_fingerprint_ = vocab.fingerprint();
  index.postings_.resize(vocab.size());
  index.doc_len_.reserve(corpus.size());
  index.page_ids_.reserve(corpus.size());

  uint64_t total_len = 0;
  std::vector<uint32_t> tf_buf(vocab.size(), 0);
  std::vector<int> touched;
  for (const Page& page : corpus.pages()) {
    const auto ordinal = static_cast<uint32_t>(index.page_ids_.size());
    TokenSeq tokens = tokenize(page.title + " " + page.content, vocab);
    touched.clear();
    for (int id : tokens.ids) {
      if (tf_buf[id]++ == 0) touched.push_back(id);
    }
    // ascending term id keeps rebuilds bit-identical
    std::sort(touched.begin(), touched.end());
    for (int id : touched) {
      index.postings_[id].push_back({ordinal, tf_buf[id]});
      tf_buf[id] = 0;
    }
    index.doc_len_.push_back(static_cast<uint32_t>(tokens.size()));
    index.page_ids_.push_back(page.id);
    total_len += tokens.size();
  }
  index.avgdl_ = static_cast<double>(total_len) /
                 static_cast<double>(index.doc_len_.size());
  return index;
}

double idf(long df, long docCount) {
  const double n = static_cast<double>(docCount);
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double idf(int termId, const Index& index) {
  return idf(index.documentFrequency(termId), index.docCount());
}

double score(const TokenSeq& queryTokens, uint32_t pageOrdinal,
             const Index& index) {
  double total = 0.0;
  for (int id : queryTokens.ids) {
    const auto& pl = index.postings(id);
    auto it = std::lower_bound(
        pl.begin(), pl.end(), pageOrdinal,
        [](const Posting& p, uint32_t doc) { return p.doc < doc; });
    if (it == pl.end() || it->doc != pageOrdinal) continue;
    const double idf_t = idf(static_cast<long>(pl.size()), index.docCount());
    total += term_contribution(it->tf, idf_t, index.docLength(pageOrdinal),
                               index.avgdl(), index.params());
  }
  return total;
}

RankedList retrieve(const std::string& question, const Index& index,
                    const Vocab& vocab, const RetrievalConfig& config,
                    const std::string& questionId) {
  RankedList ranked;
  ranked.questionId = questionId;
  TokenSeq query = tokenize(question, vocab);
  if (query.empty()) return ranked;

  const auto n_docs = static_cast<size_t>(index.docCount());
  std::vector<double> acc(n_docs, 0.0);
  std::vector<uint8_t> seen(n_docs, 0);
  std::vector<uint32_t> candidates;
  for (int id : query.ids) {
    const auto& pl = index.postings(id);
    if (pl.empty()) continue;
    const double idf_t = idf(static_cast<long>(pl.size()), index.docCount());
    for (const Posting& p : pl) {
      acc[p.doc] += term_contribution(p.tf, idf_t, index.docLength(p.doc),
                                      index.avgdl(), index.params());
      if (!seen[p.doc]) {
        seen[p.doc] = 1;
        candidates.push_back(p.doc);
      }
    }
  }

  std::erase_if(candidates, [&](uint32_t doc) { return !(acc[doc] > 0.0); });
  std::sort(candidates.begin(), candidates.end(),
            [&](uint32_t a, uint32_t b) {
              if (acc[a] != acc[b]) return acc[a] > acc[b];
              return a < b;
            });
  const size_t keep =
      std::min(candidates.size(), static_cast<size_t>(config.topK));
  ranked.entries.reserve(keep);
  for (size_t i = 0; i < keep; ++i) {
    ranked.entries.push_back({index.pageId(candidates[i]), acc[candidates[i]]});
  }
  return ranked;
}

int recall_at_k(const RankedList& ranked, const QAExample& example, int k,
                const Corpus& corpus) {
  const size_t limit =
      std::min(ranked.entries.size(), static_cast<size_t>(std::max(k, 0)));
  for (size_t i = 0; i < limit; ++i) {
    if (is_relevant_page(corpus.at(ranked.entries[i].pageId), example)) {
      return 1;
    }
  }
  return 0;
}

void save_index(const Index& index, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  nlohmann::ordered_json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["n_docs"] = index.docCount();
  manifest["avgdl"] = index.avgdl();
  manifest["k1"] = index.params().k1;
  manifest["b"] = index.params().b;
  manifest["vocab_fingerprint"] = index.vocabFingerprint();
  manifest["n_terms"] = index.termCount();
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot write " +
                               (dir / "manifest.json").string());
    }
    out << manifest.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "doclens.bin", std::ios::binary);
    for (long i = 0; i < index.docCount(); ++i) {
      write_pod(out, index.docLength(static_cast<uint32_t>(i)));
    }
  }
  {
    std::ofstream out(dir / "pageids.jsonl", std::ios::binary);
    for (const std::string& id : index.pageIds()) {
      out << nlohmann::json(id).dump() << '\n';
    }
  }
  {
    std::ofstream out(dir / "postings.bin", std::ios::binary);
    for (size_t t = 0; t < index.termCount(); ++t) {
      const auto& pl = index.postings(static_cast<int>(t));
      if (pl.empty()) continue;
      write_pod(out, static_cast<uint32_t>(t));
      write_pod(out, static_cast<uint32_t>(pl.size()));
      for (const Posting& p : pl) {
        write_pod(out, p.doc);
        write_pod(out, p.tf);
      }
    }
  }
}

Index load_index(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream min(manifest_path);
  if (!min) {
    throw std::runtime_error("cannot open index manifest " +
                             manifest_path.string());
  }
  nlohmann::json manifest = nlohmann::json::parse(min, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    throw std::runtime_error("corrupt index manifest " +
                             manifest_path.string());
  }
  const std::string version = manifest.value("format_version", "");
  if (version != kFormatVersion) {
    throw std::runtime_error("index format version mismatch: file has \"" +
                             version + "\", this build reads \"" +
                             kFormatVersion + "\"");
  }

  Index index;
  index.params_.k1 = manifest.at("k1").get<double>();
  index.params_.b = manifest.at("b").get<double>();
  index.avgdl_ = manifest.at("avgdl").get<double>();
  index.vocab_fingerprint_ = manifest.at("vocab_fingerprint").get<uint64_t>();
  const auto n_docs = manifest.at("n_docs").get<long>();
  const auto n_terms = manifest.at("n_terms").get<size_t>();

  {
    const auto path = dir / "doclens.bin";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    index.doc_len_.reserve(n_docs);
    for (long i = 0; i < n_docs; ++i) {
      index.doc_len_.push_back(read_pod<uint32_t>(in, path));
    }
  }
  {
    const auto path = dir / "pageids.jsonl";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.is_string()) {
        throw std::runtime_error("corrupt index file " + path.string());
      }
      index.page_ids_.push_back(rec.get<std::string>());
    }
    if (index.page_ids_.size() != static_cast<size_t>(n_docs)) {
      throw std::runtime_error("corrupt index file " + path.string() +
                               ": page id count does not match manifest");
    }
  }
  {
    const auto path = dir / "postings.bin";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    index.postings_.resize(n_terms);
    while (in.peek() != EOF) {
      const auto term = read_pod<uint32_t>(in, path);
      const auto count = read_pod<uint32_t>(in, path);
      if (term >= n_terms) {
        throw std::runtime_error("corrupt index file " + path.string() +
                                 ": term id out of range");
      }
      auto& pl = index.postings_[term];
      pl.reserve(count);
      for (uint32_t i = 0; i < count; ++i) {
        const auto doc = read_pod<uint32_t>(in, path);
        const auto tf = read_pod<uint32_t>(in, path);
        if (doc >= static_cast<uint32_t>(n_docs)) {
          throw std::runtime_error("corrupt index file " + path.string() +
                                   ": doc ordinal out of range");
        }
        pl.push_back({doc, tf});
      }
    }
  }
  return index;
}

}  // namespace ragwin
