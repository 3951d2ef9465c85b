#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "ragwin/corpus.hpp"
#include "ragwin/prompting.hpp"
#include "ragwin/windowing.hpp"
#include "ragwin/wordpiece.hpp"

// Uniform generation interface with three backends: a remote HTTP endpoint,
// a deterministic oracle mock, and a stochastic hallucinator mock for
// abstention studies. Mock completions are pure functions of (prompt, seed);
// all backends are safe for concurrent generate calls.
namespace ragwin {

enum class Decoding { greedy };

struct GenConfig {
  Decoding decoding = Decoding::greedy;
  int maxOutputTokens = 256;
  std::chrono::milliseconds requestTimeout{30000};
  int retries = 3;
};

struct Completion {
  std::string text;
  long promptTokens = 0;
  long outputTokens = 0;
  std::string backendName;
  std::chrono::milliseconds latency{0};
  // set when the remote omitted token counts and the wordpiece count was
  // used instead
  bool tokenCountsEstimated = false;
};

struct HallucinatorConfig {
  double falseAnswerProb = 0.543;
  uint64_t seed = 0;
};

class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& what, int attempts)
      : std::runtime_error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_ = 1;
};

// window/example carry the gold-side metadata the mock backends need; the
// HTTP backend ignores them and sends only the prompt text.
struct GenRequest {
  const Prompt& prompt;
  const Window* window = nullptr;
  const QAExample* example = nullptr;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual Completion generate(const GenRequest& request,
                              const GenConfig& cfg) = 0;
};

// Ideal reader: on a positive window emits the canonical format with the
// first relevant page's id, the sentence containing a gold alias as
// EVIDENCE, and the first gold alias as ANSWER; on a negative window it
// abstains.
class OracleBackend : public Backend {
 public:
  explicit OracleBackend(const Vocab& vocab) : vocab_(vocab) {}
  std::string name() const override { return "oracle"; }
  Completion generate(const GenRequest& request, const GenConfig& cfg) override;

 private:
  const Vocab& vocab_;
};

// Behaves as the oracle on positive windows; on a negative window it
// fabricates an answer drawn from the window's own text with probability
// falseAnswerProb, and abstains otherwise. Fully determined by
// (window, example, seed).
class HallucinatorBackend : public Backend {
 public:
  HallucinatorBackend(const Vocab& vocab, HallucinatorConfig cfg)
      : vocab_(vocab), cfg_(cfg) {}
  std::string name() const override { return "hallucinator"; }
  Completion generate(const GenRequest& request, const GenConfig& cfg) override;

 private:
  const Vocab& vocab_;
  HallucinatorConfig cfg_;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://host:port/v1/generate
  std::string model;     // optional, forwarded in the request body
  std::string authToken; // sent as "Authorization: Bearer <token>" when set
  std::chrono::milliseconds retryBackoff{250};
};

// Single POST per generation: request {"prompt": ..., "max_output_tokens":
// ...}, response {"text": ..., "prompt_token_count"?, "output_token_count"?}.
class HttpBackend : public Backend {
 public:
  HttpBackend(const Vocab& vocab, HttpBackendConfig cfg);
  std::string name() const override { return "http"; }
  Completion generate(const GenRequest& request, const GenConfig& cfg) override;

 private:
  const Vocab& vocab_;
  HttpBackendConfig cfg_;
};

std::unique_ptr<Backend> make_backend(const std::string& kind,
                                      const Vocab& vocab,
                                      const HallucinatorConfig& hallCfg,
                                      const HttpBackendConfig& httpCfg);

}  // namespace ragwin
