#include "ragwin/llm.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ragwin/normalize.hpp"
#include "ragwin/parsing.hpp"
#include "ragwin/rng.hpp"
#include "ragwin/text.hpp"

namespace ragwin {

namespace {

std::string abstain_text() {
  return "ANSWER: " + std::string(kAbstainMarker);
}

// Splits on sentence-final punctuation, keeping the delimiter.
std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> sentences;
  std::string current;
  for (char c : text) {
    current.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      sentences.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) sentences.push_back(current);
  return sentences;
}

std::string trim_copy(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// First sentence of the page whose normalized form contains a normalized
// gold alias; falls back to the title, then the first sentence.
std::string find_evidence(const Page& page, const QAExample& example) {
  const std::vector<std::string> sentences = split_sentences(page.content);
  for (const std::string& alias : example.answers) {
    const std::string needle = normalize_answer(alias);
    if (needle.empty()) continue;
    for (const std::string& sentence : sentences) {
      if (normalize_answer(sentence).find(needle) != std::string::npos) {
        return trim_copy(sentence);
      }
    }
  }
  if (!page.title.empty()) return page.title;
  if (!sentences.empty()) return trim_copy(sentences.front());
  return "";
}

std::string oracle_answer_text(const Window& window,
                               const QAExample& example) {
  const Page* relevant = nullptr;
  for (const Page* page : window.pages) {
    if (is_relevant_page(*page, example)) {
      relevant = page;
      break;
    }
  }
  if (relevant == nullptr) return abstain_text();
  std::string out = "PAGE_ID: " + relevant->id + "\n";
  out += "EVIDENCE: " + find_evidence(*relevant, example) + "\n";
  out += "ANSWER: " + example.answers.front();
  return out;
}

void require_mock_metadata(const GenRequest& request, const char* backend) {
  if (request.window == nullptr || request.example == nullptr) {
    throw std::runtime_error(std::string(backend) +
                             " backend needs window and example metadata");
  }
}

Completion make_mock_completion(std::string text, const GenRequest& request,
                                const Vocab& vocab, std::string backend) {
  Completion completion;
  completion.text = std::move(text);
  completion.promptTokens = request.prompt.tokenCount;
  completion.outputTokens = count_tokens(completion.text, vocab);
  completion.backendName = std::move(backend);
  return completion;
}

// Alphabetic-ish words of a page usable as a fabricated noun phrase.
std::vector<std::string> candidate_words(const Page& page) {
  std::vector<std::string> words;
  for (const std::string& w : basic_tokenize(page.content)) {
    if (w.size() >= 3 && !is_punct_cp(static_cast<unsigned char>(w[0]))) {
      words.push_back(w);
    }
  }
  if (words.empty()) {
    for (const std::string& w : basic_tokenize(page.title)) {
      words.push_back(w);
    }
  }
  return words;
}

uint64_t window_call_seed(uint64_t seed, const Window& window,
                          const QAExample& example) {
  uint64_t h = hash_mix(seed, fnv1a64(example.id));
  h = hash_mix(h, static_cast<uint64_t>(window.ordinal));
  for (const Page* page : window.pages) {
    h = hash_mix(h, fnv1a64(page->id));
  }
  return h;
}

}  // namespace

Completion OracleBackend::generate(const GenRequest& request,
                                   const GenConfig& /*cfg*/) {
  require_mock_metadata(request, "oracle");
  return make_mock_completion(
      oracle_answer_text(*request.window, *request.example), request, vocab_,
      name());
}

Completion HallucinatorBackend::generate(const GenRequest& request,
                                         const GenConfig& /*cfg*/) {
  require_mock_metadata(request, "hallucinator");
  const Window& window = *request.window;
  const QAExample& example = *request.example;
  if (window.label == WindowLabel::positive) {
    return make_mock_completion(oracle_answer_text(window, example), request,
                                vocab_, name());
  }
  SmallRng rng(window_call_seed(cfg_.seed, window, example));
  if (rng.unit() >= cfg_.falseAnswerProb || window.pages.empty()) {
    return make_mock_completion(abstain_text(), request, vocab_, name());
  }
  // fabricate: a short phrase lifted from a random page of the window
  const Page& page = *window.pages[rng.below(window.pages.size())];
  const std::vector<std::string> words = candidate_words(page);
  std::string answer;
  if (words.empty()) {
    answer = page.id;
  } else {
    const size_t span = 1 + static_cast<size_t>(rng.below(3));
    const size_t start = static_cast<size_t>(rng.below(words.size()));
    for (size_t i = start; i < std::min(words.size(), start + span); ++i) {
      if (!answer.empty()) answer.push_back(' ');
      answer += words[i];
    }
  }
  std::string text = "PAGE_ID: " + page.id + "\n";
  const std::vector<std::string> sentences = split_sentences(page.content);
  text += "EVIDENCE: " +
          (sentences.empty() ? page.title : trim_copy(sentences.front())) +
          "\n";
  text += "ANSWER: " + answer;
  return make_mock_completion(std::move(text), request, vocab_, name());
}

HttpBackend::HttpBackend(const Vocab& vocab, HttpBackendConfig cfg)
    : vocab_(vocab), cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty()) {
    throw std::runtime_error("http backend needs an endpoint URL");
  }
}

Completion HttpBackend::generate(const GenRequest& request,
                                 const GenConfig& cfg) {
  // split endpoint into origin + path
  std::string origin = cfg_.endpoint;
  std::string path = "/";
  const size_t scheme = origin.find("://");
  const size_t slash =
      origin.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    path = origin.substr(slash);
    origin = origin.substr(0, slash);
  }

  nlohmann::json body;
  body["prompt"] = request.prompt.text;
  body["max_output_tokens"] = cfg.maxOutputTokens;
  if (!cfg_.model.empty()) body["model"] = cfg_.model;
  const std::string payload = body.dump();

  const auto start = std::chrono::steady_clock::now();
  std::string last_error;
  const int attempts_allowed = cfg.retries + 1;
  for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
        cfg.requestTimeout));
    client.set_read_timeout(cfg.requestTimeout);
    client.set_write_timeout(cfg.requestTimeout);
    httplib::Headers headers;
    if (!cfg_.authToken.empty()) {
      headers.emplace("Authorization", "Bearer " + cfg_.authToken);
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      if (attempt < attempts_allowed) {
        std::this_thread::sleep_for(cfg_.retryBackoff);
        continue;
      }
      throw BackendError("http backend: " + last_error + " after " +
                             std::to_string(attempt) + " attempts",
                         attempt);
    }
    if (res->status < 200 || res->status >= 300) {
      const std::string excerpt = res->body.substr(0, 200);
      throw BackendError("http backend: status " +
                             std::to_string(res->status) + ", body: " + excerpt,
                         attempt);
    }
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() ||
        !reply.contains("text") || !reply["text"].is_string()) {
      throw BackendError(
          "http backend: response is not a JSON object with a \"text\" field",
          attempt);
    }
    Completion completion;
    completion.text = reply["text"].get<std::string>();
    completion.backendName = name();
    completion.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    if (reply.contains("prompt_token_count") &&
        reply["prompt_token_count"].is_number()) {
      completion.promptTokens = reply["prompt_token_count"].get<long>();
    } else {
      completion.promptTokens = request.prompt.tokenCount;
      completion.tokenCountsEstimated = true;
    }
    if (reply.contains("output_token_count") &&
        reply["output_token_count"].is_number()) {
      completion.outputTokens = reply["output_token_count"].get<long>();
    } else {
      completion.outputTokens = count_tokens(completion.text, vocab_);
      completion.tokenCountsEstimated = true;
    }
    return completion;
  }
  throw BackendError("http backend: " + last_error, attempts_allowed);
}

std::unique_ptr<Backend> make_backend(const std::string& kind,
                                      const Vocab& vocab,
                                      const HallucinatorConfig& hallCfg,
                                      const HttpBackendConfig& httpCfg) {
  if (kind == "oracle") return std::make_unique<OracleBackend>(vocab);
  if (kind == "hallucinator") {
    return std::make_unique<HallucinatorBackend>(vocab, hallCfg);
  }
  if (kind == "http") return std::make_unique<HttpBackend>(vocab, httpCfg);
  throw std::runtime_error("unknown backend \"" + kind +
                           "\" (expected oracle, hallucinator, or http)");
}

}  // namespace ragwin
