#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "helpers.hpp"
#include "ragwin/bm25.hpp"
#include "ragwin/rng.hpp"

using namespace ragwin;
using namespace ragwin::testing;

namespace {

Corpus toy_corpus() {
  Corpus corpus;
  corpus.add(make_page("D1", "", "cat sat"));
  corpus.add(make_page("D2", "", "dog sat sat"));
  return corpus;
}

Vocab toy_vocab() { return make_vocab({"cat", "sat", "dog"}); }

// Brute-force BM25 reference: re-tokenizes every document and sums the
// formula per query-token occurrence, independent of the index structures.
std::vector<std::pair<std::string, double>> brute_force_rank(
    const std::string& question, const Corpus& corpus, const Vocab& vocab,
    const BM25Params& params, int top_k) {
  const TokenSeq query = tokenize(question, vocab);
  const long n = static_cast<long>(corpus.size());

  std::vector<std::map<int, long>> doc_tf;
  std::vector<long> doc_len;
  std::map<int, long> df;
  for (const Page& page : corpus.pages()) {
    const TokenSeq toks = tokenize(page.title + " " + page.content, vocab);
    std::map<int, long> tf;
    for (int id : toks.ids) ++tf[id];
    for (const auto& [term, _] : tf) ++df[term];
    doc_tf.push_back(std::move(tf));
    doc_len.push_back(static_cast<long>(toks.size()));
  }
  double total_len = 0;
  for (long l : doc_len) total_len += static_cast<double>(l);
  const double avgdl = total_len / static_cast<double>(n);

  std::vector<std::pair<std::string, double>> scored;
  for (size_t d = 0; d < corpus.size(); ++d) {
    double s = 0.0;
    for (int id : query.ids) {
      auto it = doc_tf[d].find(id);
      if (it == doc_tf[d].end()) continue;
      const double tf = static_cast<double>(it->second);
      const double term_df = static_cast<double>(df[id]);
      const double idf_t =
          std::log(1.0 + (static_cast<double>(n) - term_df + 0.5) /
                             (term_df + 0.5));
      const double norm =
          1.0 - params.b +
          params.b * (static_cast<double>(doc_len[d]) / avgdl);
      s += idf_t * (tf * (params.k1 + 1.0)) / (tf + params.k1 * norm);
    }
    if (s > 0.0) scored.emplace_back(corpus.pages()[d].id, s);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  if (static_cast<int>(scored.size()) > top_k) scored.resize(top_k);
  return scored;
}

}  // namespace

TEST_CASE("build_index statistics on the toy corpus") {
  const Corpus corpus = toy_corpus();
  const Vocab vocab = toy_vocab();
  const Index index = build_index(corpus, vocab, {});
  CHECK(index.docCount() == 2);
  CHECK(index.documentFrequency(vocab.id_of("sat")) == 2);
  CHECK(index.documentFrequency(vocab.id_of("cat")) == 1);
  CHECK(index.documentFrequency(vocab.id_of("dog")) == 1);
  CHECK(index.docLength(0) == 2);
  CHECK(index.docLength(1) == 3);
  CHECK(index.avgdl() == doctest::Approx(2.5));
}

TEST_CASE("single-document corpus has avgdl == docLen") {
  Corpus corpus;
  corpus.add(make_page("only", "t", "cat cat sat"));
  const Vocab vocab = toy_vocab();
  const Index index = build_index(corpus, vocab, {});
  CHECK(index.avgdl() == static_cast<double>(index.docLength(0)));
}

TEST_CASE("build_index twice is bit-identical") {
  const Corpus corpus = toy_corpus();
  const Vocab vocab = toy_vocab();
  const Index a = build_index(corpus, vocab, {});
  const Index b = build_index(corpus, vocab, {});
  CHECK(a.avgdl() == b.avgdl());
  for (size_t t = 0; t < vocab.size(); ++t) {
    const auto& pa = a.postings(static_cast<int>(t));
    const auto& pb = b.postings(static_cast<int>(t));
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i) {
      CHECK(pa[i].doc == pb[i].doc);
      CHECK(pa[i].tf == pb[i].tf);
    }
  }
}

TEST_CASE("build_index rejects an empty corpus") {
  CHECK_THROWS_AS(build_index(Corpus{}, toy_vocab(), {}), std::runtime_error);
}

TEST_CASE("idf formula values") {
  CHECK(idf(2, 2) == doctest::Approx(std::log(1.2)).epsilon(1e-12));
  CHECK(idf(0, 1) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  // non-increasing in df, strictly positive for df <= N
  const long n = 100;
  double prev = std::numeric_limits<double>::infinity();
  for (long df = 0; df <= n; ++df) {
    const double v = idf(df, n);
    CHECK(v > 0.0);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("score matches the frozen brute-force values") {
  const Corpus corpus = toy_corpus();
  const Vocab vocab = toy_vocab();
  const Index index = build_index(corpus, vocab, {});
  const TokenSeq query = tokenize("sat", vocab);

  const double s1 = score(query, 0, index);
  const double s2 = score(query, 1, index);
  // brute-force oracle values (idf(sat)=ln 1.2 times the saturation
  // factors 1.0820 and 1.2484)
  CHECK(s1 == doctest::Approx(0.19727275507318548).epsilon(1e-12));
  CHECK(s2 == doctest::Approx(0.22760246905947026).epsilon(1e-12));
  CHECK(s2 > s1);
}

TEST_CASE("score is zero without term overlap") {
  const Corpus corpus = toy_corpus();
  const Vocab vocab = make_vocab({"cat", "sat", "dog", "bird"});
  const Index index = build_index(corpus, vocab, {});
  const TokenSeq query = tokenize("bird", vocab);
  CHECK(score(query, 0, index) == 0.0);
  CHECK(score(query, 1, index) == 0.0);
}

TEST_CASE("duplicating every query term scales scores uniformly") {
  const Corpus corpus = toy_corpus();
  const Vocab vocab = toy_vocab();
  const Index index = build_index(corpus, vocab, {});
  const TokenSeq once = tokenize("cat sat", vocab);
  const TokenSeq twice = tokenize("cat sat cat sat", vocab);
  for (uint32_t d = 0; d < 2; ++d) {
    CHECK(score(twice, d, index) ==
          doctest::Approx(2.0 * score(once, d, index)).epsilon(1e-12));
  }
  // ranking therefore unchanged
  const RetrievalConfig rc{10};
  const auto r1 = retrieve("cat sat", index, vocab, rc);
  const auto r2 = retrieve("cat sat cat sat", index, vocab, rc);
  REQUIRE(r1.entries.size() == r2.entries.size());
  for (size_t i = 0; i < r1.entries.size(); ++i) {
    CHECK(r1.entries[i].pageId == r2.entries[i].pageId);
  }
}

TEST_CASE("retrieve basics") {
  const Corpus corpus = toy_corpus();
  const Vocab vocab = toy_vocab();
  const Index index = build_index(corpus, vocab, {});

  SUBCASE("topK=1 returns the highest scorer") {
    const RankedList ranked = retrieve("sat", index, vocab, {1});
    REQUIRE(ranked.entries.size() == 1);
    CHECK(ranked.entries[0].pageId == "D2");
  }
  SUBCASE("topK beyond match count returns all matches, no padding") {
    const RankedList ranked = retrieve("cat", index, vocab, {50});
    REQUIRE(ranked.entries.size() == 1);
    CHECK(ranked.entries[0].pageId == "D1");
  }
  SUBCASE("empty question yields an empty list") {
    CHECK(retrieve("", index, vocab, {10}).entries.empty());
    CHECK(retrieve("   \t ", index, vocab, {10}).entries.empty());
    // tokenizes to [UNK] only, which no document contains
    CHECK(retrieve("zzz", index, vocab, {10}).entries.empty());
  }
  SUBCASE("scores are non-increasing") {
    const RankedList ranked = retrieve("sat cat dog", index, vocab, {10});
    for (size_t i = 1; i < ranked.entries.size(); ++i) {
      CHECK(ranked.entries[i - 1].score >= ranked.entries[i].score);
    }
  }
}

TEST_CASE("retrieve with smaller topK is a prefix of larger topK") {
  Corpus corpus;
  // several identical docs to force ties, broken by ordinal
  for (int i = 0; i < 8; ++i) {
    corpus.add(make_page("p" + std::to_string(i), "", "cat sat"));
  }
  const Vocab vocab = toy_vocab();
  const Index index = build_index(corpus, vocab, {});
  const auto r3 = retrieve("cat", index, vocab, {3});
  const auto r6 = retrieve("cat", index, vocab, {6});
  REQUIRE(r3.entries.size() == 3);
  REQUIRE(r6.entries.size() == 6);
  for (size_t i = 0; i < r3.entries.size(); ++i) {
    CHECK(r3.entries[i].pageId == r6.entries[i].pageId);
  }
  // ties broken by ingestion order
  CHECK(r6.entries[0].pageId == "p0");
  CHECK(r6.entries[5].pageId == "p5");
}

TEST_CASE("df identity: sum of df equals distinct (term, doc) pairs") {
  Corpus corpus;
  SmallRng rng(21);
  const std::vector<std::string> pool = {"cat", "sat", "dog", "mat", "rat"};
  for (int d = 0; d < 20; ++d) {
    std::string text;
    const size_t len = 1 + rng.below(12);
    for (size_t k = 0; k < len; ++k) {
      if (!text.empty()) text.push_back(' ');
      text += pool[rng.below(pool.size())];
    }
    corpus.add(make_page("p" + std::to_string(d), "", text));
  }
  const Vocab vocab = make_vocab({"cat", "sat", "dog", "mat", "rat"});
  const Index index = build_index(corpus, vocab, {});

  long df_sum = 0;
  for (size_t t = 0; t < vocab.size(); ++t) {
    df_sum += index.documentFrequency(static_cast<int>(t));
  }
  std::set<std::pair<int, std::string>> pairs;
  for (const Page& page : corpus.pages()) {
    for (int id : tokenize(page.title + " " + page.content, vocab).ids) {
      pairs.emplace(id, page.id);
    }
  }
  CHECK(df_sum == static_cast<long>(pairs.size()));
}

TEST_CASE("retrieve matches the brute-force reference on random corpora") {
  SmallRng rng(99);
  const std::vector<std::string> pool = {"alpha", "beta",  "gamma", "delta",
                                         "eps",   "zeta",  "eta",   "theta",
                                         "iota",  "kappa", "lam",   "mu"};
  const Vocab vocab = make_vocab(std::vector<std::string>(pool));
  const BM25Params params{0.9, 0.8};

  for (int trial = 0; trial < 5; ++trial) {
    Corpus corpus;
    const size_t n_docs = 20 + rng.below(60);
    for (size_t d = 0; d < n_docs; ++d) {
      std::string text;
      const size_t len = 1 + rng.below(30);
      for (size_t k = 0; k < len; ++k) {
        if (!text.empty()) text.push_back(' ');
        text += pool[rng.below(pool.size())];
      }
      corpus.add(make_page("p" + std::to_string(d), "", text));
    }
    const Index index = build_index(corpus, vocab, params);
    for (int q = 0; q < 10; ++q) {
      std::string question;
      const size_t qlen = 1 + rng.below(4);
      for (size_t k = 0; k < qlen; ++k) {
        if (!question.empty()) question.push_back(' ');
        question += pool[rng.below(pool.size())];
      }
      const RankedList got = retrieve(question, index, vocab, {15});
      const auto want = brute_force_rank(question, corpus, vocab, params, 15);
      REQUIRE(got.entries.size() == want.size());
      for (size_t i = 0; i < want.size(); ++i) {
        CHECK(got.entries[i].pageId == want[i].first);
        CHECK(got.entries[i].score ==
              doctest::Approx(want[i].second).epsilon(1e-9));
        CHECK(std::isfinite(got.entries[i].score));
        CHECK(got.entries[i].score >= 0.0);
      }
    }
  }
}

TEST_CASE("recall_at_k") {
  Corpus corpus;
  corpus.add(make_page("p0", "", "the answer is here: paris"));
  corpus.add(make_page("p1", "", "nothing relevant"));
  corpus.add(make_page("p2", "", "still nothing"));
  RankedList ranked;
  ranked.entries = {{"p0", 3.0}, {"p1", 2.0}, {"p2", 1.0}};
  const QAExample ex = make_example("q", "where?", {"Paris"});

  SUBCASE("relevant at rank 1") {
    CHECK(recall_at_k(ranked, ex, 1, corpus) == 1);
  }
  SUBCASE("no relevant page anywhere") {
    const QAExample miss = make_example("q", "where?", {"tokyo"});
    for (int k = 1; k <= 5; ++k) {
      CHECK(recall_at_k(ranked, miss, k, corpus) == 0);
    }
  }
  SUBCASE("monotone non-decreasing in k") {
    RankedList tail;
    tail.entries = {{"p1", 3.0}, {"p2", 2.0}, {"p0", 1.0}};
    int prev = 0;
    for (int k = 1; k <= 4; ++k) {
      const int r = recall_at_k(tail, ex, k, corpus);
      CHECK(r >= prev);
      prev = r;
    }
    CHECK(prev == 1);
  }
}

TEST_CASE("index save/load round trip answers queries identically") {
  SmallRng rng(5);
  const std::vector<std::string> pool = {"cat", "sat", "dog", "mat", "rat",
                                         "bat"};
  Corpus corpus;
  for (int d = 0; d < 30; ++d) {
    std::string text;
    const size_t len = 1 + rng.below(15);
    for (size_t k = 0; k < len; ++k) {
      if (!text.empty()) text.push_back(' ');
      text += pool[rng.below(pool.size())];
    }
    corpus.add(make_page("p" + std::to_string(d), "", text));
  }
  const Vocab vocab = make_vocab(std::vector<std::string>(pool));
  const Index built = build_index(corpus, vocab, {});

  TempDir tmp("index_rt");
  save_index(built, tmp.path());
  const Index loaded = load_index(tmp.path());
  CHECK(loaded.docCount() == built.docCount());
  CHECK(loaded.avgdl() == built.avgdl());
  CHECK(loaded.vocabFingerprint() == vocab.fingerprint());

  for (int q = 0; q < 10; ++q) {
    std::string question;
    const size_t qlen = 1 + rng.below(3);
    for (size_t k = 0; k < qlen; ++k) {
      if (!question.empty()) question.push_back(' ');
      question += pool[rng.below(pool.size())];
    }
    const RankedList a = retrieve(question, built, vocab, {10});
    const RankedList b = retrieve(question, loaded, vocab, {10});
    REQUIRE(a.entries.size() == b.entries.size());
    for (size_t i = 0; i < a.entries.size(); ++i) {
      CHECK(a.entries[i].pageId == b.entries[i].pageId);
      CHECK(a.entries[i].score == b.entries[i].score);
    }
  }
}

TEST_CASE("load_index error paths") {
  TempDir tmp("index_err");
  SUBCASE("empty directory") {
    CHECK_THROWS_AS(load_index(tmp.path()), std::runtime_error);
  }
  SUBCASE("unknown format version names both versions") {
    write_file(tmp.file("manifest.json"),
               R"({"format_version":"ragwin-index-v999","n_docs":0,)"
               R"("avgdl":0,"k1":0.9,"b":0.8,"vocab_fingerprint":0,)"
               R"("n_terms":0})");
    CHECK_THROWS_WITH_AS(load_index(tmp.path()),
                         doctest::Contains("ragwin-index-v999"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(load_index(tmp.path()),
                         doctest::Contains("ragwin-index-v1"),
                         std::runtime_error);
  }
  SUBCASE("corrupt postings file") {
    Corpus corpus = toy_corpus();
    const Vocab vocab = toy_vocab();
    save_index(build_index(corpus, vocab, {}), tmp.path());
    write_file(tmp.file("postings.bin"), "short");
    CHECK_THROWS_WITH_AS(load_index(tmp.path()),
                         doctest::Contains("corrupt"), std::runtime_error);
  }
}
