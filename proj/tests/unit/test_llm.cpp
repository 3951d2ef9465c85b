#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "helpers.hpp"
#include "ragwin/llm.hpp"
#include "ragwin/parsing.hpp"

using namespace ragwin;
using namespace ragwin::testing;

namespace {

struct MockFixture {
  Corpus corpus;
  Vocab vocab = make_vocab({"moon", "landing", "was", "in", "the", "red",
                            "planet", "mars", "hot", "venus", "q"});
  QAExample example = make_example("q1", "when was the moon landing?",
                                   {"1969"});
  Window positive, negative;
  Prompt prompt;

  MockFixture() {
    corpus.add(make_page("p1", "Moon", "The moon landing was in 1969."));
    corpus.add(make_page("p2", "Mars", "Mars is the red planet."));
    corpus.add(make_page("p3", "Venus", "Venus is very hot."));
    positive.ordinal = 0;
    positive.pages = {&corpus.pages()[1], &corpus.pages()[0]};
    positive.label = WindowLabel::positive;
    negative.ordinal = 1;
    negative.pages = {&corpus.pages()[1], &corpus.pages()[2]};
    negative.label = WindowLabel::negative;
    prompt.text = "q";
    prompt.tokenCount = 1;
  }
};

}  // namespace

TEST_CASE("oracle answers from the first relevant page of a positive window") {
  MockFixture fx;
  OracleBackend oracle(fx.vocab);
  const Completion completion =
      oracle.generate({fx.prompt, &fx.positive, &fx.example}, {});
  const Prediction pred = parse_completion(completion.text);
  CHECK(pred.kind == PredictionKind::found);
  CHECK(pred.pageId == "p1");  // first relevant page in window order
  CHECK(pred.answer == "1969");
  REQUIRE(pred.evidence.has_value());
  CHECK(pred.evidence->find("1969") != std::string::npos);
  CHECK(completion.promptTokens == fx.prompt.tokenCount);
  CHECK(completion.outputTokens > 0);
  CHECK(completion.backendName == "oracle");
}

TEST_CASE("oracle abstains on a negative window") {
  MockFixture fx;
  OracleBackend oracle(fx.vocab);
  const Completion completion =
      oracle.generate({fx.prompt, &fx.negative, &fx.example}, {});
  CHECK(completion.text == "ANSWER: answer not found");
  CHECK(parse_completion(completion.text).kind == PredictionKind::notFound);
}

TEST_CASE("mock backends are deterministic for a fixed seed") {
  MockFixture fx;
  HallucinatorBackend h1(fx.vocab, {0.543, 1234});
  HallucinatorBackend h2(fx.vocab, {0.543, 1234});
  for (const Window* window : {&fx.positive, &fx.negative}) {
    const Completion a = h1.generate({fx.prompt, window, &fx.example}, {});
    const Completion b = h2.generate({fx.prompt, window, &fx.example}, {});
    CHECK(a.text == b.text);
  }
  OracleBackend o(fx.vocab);
  CHECK(o.generate({fx.prompt, &fx.positive, &fx.example}, {}).text ==
        o.generate({fx.prompt, &fx.positive, &fx.example}, {}).text);
}

TEST_CASE("hallucinator degenerate probabilities") {
  MockFixture fx;
  SUBCASE("p=0 behaves exactly as the oracle") {
    HallucinatorBackend hall(fx.vocab, {0.0, 99});
    OracleBackend oracle(fx.vocab);
    for (const Window* window : {&fx.positive, &fx.negative}) {
      CHECK(hall.generate({fx.prompt, window, &fx.example}, {}).text ==
            oracle.generate({fx.prompt, window, &fx.example}, {}).text);
    }
  }
  SUBCASE("p=1 always fabricates on negative windows") {
    HallucinatorBackend hall(fx.vocab, {1.0, 99});
    for (uint64_t seed = 0; seed < 20; ++seed) {
      HallucinatorBackend h(fx.vocab, {1.0, seed});
      const Completion c =
          h.generate({fx.prompt, &fx.negative, &fx.example}, {});
      const Prediction pred = parse_completion(c.text);
      CHECK(pred.kind == PredictionKind::found);
      // fabricated answers never match the gold alias
      CHECK(pred.answer != "1969");
    }
    // positive windows still answered correctly
    const Completion c =
        hall.generate({fx.prompt, &fx.positive, &fx.example}, {});
    CHECK(parse_completion(c.text).answer == "1969");
  }
}

TEST_CASE("hallucinator fabrication rate approaches p over many windows") {
  MockFixture fx;
  HallucinatorBackend hall(fx.vocab, {0.543, 20250811});
  long fabricated = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    QAExample ex = fx.example;
    ex.id = "q" + std::to_string(i);  // distinct windows per trial
    const Completion c = hall.generate({fx.prompt, &fx.negative, &ex}, {});
    if (parse_completion(c.text).kind == PredictionKind::found) ++fabricated;
  }
  const double rate = static_cast<double>(fabricated) / trials;
  CHECK(rate == doctest::Approx(0.543).epsilon(0.037));  // +/- 0.02 absolute
  CHECK(rate > 0.523);
  CHECK(rate < 0.563);
}

TEST_CASE("mock backends require window metadata") {
  MockFixture fx;
  OracleBackend oracle(fx.vocab);
  CHECK_THROWS_AS(oracle.generate({fx.prompt, nullptr, nullptr}, {}),
                  std::runtime_error);
}

TEST_CASE("http backend") {
  MockFixture fx;
  httplib::Server server;
  std::atomic<int> hits{0};

  server.Post("/generate", [&](const httplib::Request& req,
                               httplib::Response& res) {
    ++hits;
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json reply;
    reply["text"] = "ANSWER: echo " +
                    std::to_string(body.at("prompt").get<std::string>().size());
    reply["prompt_token_count"] = 42;
    reply["output_token_count"] = 5;
    res.set_content(reply.dump(), "application/json");
  });
  server.Post("/no-counts", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"text":"ANSWER: answer not found"})",
                    "application/json");
  });
  server.Post("/fail", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
    res.set_content("upstream broke", "text/plain");
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  GenConfig gen;
  gen.retries = 2;

  SUBCASE("success path uses server token counts") {
    HttpBackend backend(fx.vocab, {base + "/generate", "test-model", "tok",
                                   std::chrono::milliseconds(1)});
    const Completion c = backend.generate({fx.prompt, nullptr, nullptr}, gen);
    CHECK(c.text.substr(0, 12) == "ANSWER: echo");
    CHECK(c.promptTokens == 42);
    CHECK(c.outputTokens == 5);
    CHECK_FALSE(c.tokenCountsEstimated);
    CHECK(c.backendName == "http");
  }
  SUBCASE("missing token counts fall back to wordpiece, flagged") {
    HttpBackend backend(fx.vocab,
                        {base + "/no-counts", "", "",
                         std::chrono::milliseconds(1)});
    const Completion c = backend.generate({fx.prompt, nullptr, nullptr}, gen);
    CHECK(c.tokenCountsEstimated);
    CHECK(c.promptTokens == fx.prompt.tokenCount);
    CHECK(c.outputTokens ==
          count_tokens("ANSWER: answer not found", fx.vocab));
  }
  SUBCASE("non-success status raises with status and body excerpt") {
    HttpBackend backend(fx.vocab,
                        {base + "/fail", "", "", std::chrono::milliseconds(1)});
    CHECK_THROWS_WITH_AS(backend.generate({fx.prompt, nullptr, nullptr}, gen),
                         doctest::Contains("503"), BackendError);
    try {
      backend.generate({fx.prompt, nullptr, nullptr}, gen);
    } catch (const BackendError& e) {
      CHECK(std::string(e.what()).find("upstream broke") !=
            std::string::npos);
    }
  }
  SUBCASE("transport failure retries then reports the attempt count") {
    HttpBackend backend(fx.vocab, {"http://127.0.0.1:1/generate", "", "",
                                   std::chrono::milliseconds(1)});
    try {
      backend.generate({fx.prompt, nullptr, nullptr}, gen);
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.attempts() == gen.retries + 1);
      CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
    }
  }

  server.stop();
  server_thread.join();
}

TEST_CASE("make_backend dispatch") {
  MockFixture fx;
  CHECK(make_backend("oracle", fx.vocab, {}, {})->name() == "oracle");
  CHECK(make_backend("hallucinator", fx.vocab, {}, {})->name() ==
        "hallucinator");
  CHECK_THROWS_AS(make_backend("nope", fx.vocab, {}, {}), std::runtime_error);
  CHECK_THROWS_AS(make_backend("http", fx.vocab, {}, {}), std::runtime_error);
}
