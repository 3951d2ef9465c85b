#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ragwin/bm25.hpp"
#include "ragwin/corpus.hpp"
#include "ragwin/llm.hpp"
#include "ragwin/parsing.hpp"
#include "ragwin/prompting.hpp"
#include "ragwin/windowing.hpp"

// Executes the iterative sliding-window protocol and the fixed-window
// baseline per question, recording a full trace of every step. Each
// window's prompt is independent; nothing carries over between windows.
namespace ragwin {

enum class RunMode { iterative, fixed };

struct RunConfig {
  WindowConfig windowCfg;
  RetrievalConfig retrievalCfg;
  int shots = 0;
  GenConfig genCfg;
  RunMode mode = RunMode::iterative;
  int fixedSize = 100;  // pages in the single fixed-mode window
  int workerCount = 1;
  uint64_t seed = 0;
};

struct StepRecord {
  int windowOrdinal = 0;
  WindowLabel windowLabel = WindowLabel::negative;
  long promptTokens = 0;
  long outputTokens = 0;
  Prediction prediction;
  std::optional<std::string> error;  // backend failure on this step
};

struct RunRecord {
  std::string questionId;
  RunMode mode = RunMode::iterative;
  std::string backendName;
  std::vector<StepRecord> steps;
  std::optional<std::string> finalAnswer;  // present iff some step found
  // window ordinal where the run stopped; nullopt when every window was
  // consumed without an answer ("exhausted")
  std::optional<int> stoppedAt;
  long totalPromptTokens = 0;
  long totalOutputTokens = 0;
  // ordinal of the first positive window over the windows built for this
  // run; doubles as the negatives-before-first-positive count
  std::optional<int> firstPositiveOrdinal;
  std::optional<std::string> error;  // run-level failure
};

struct RunContext {
  const Corpus& corpus;
  const Index& index;
  const Vocab& vocab;
  const PromptTemplate& tmpl;
  const std::vector<Exemplar>* exemplarPool = nullptr;  // needed when shots > 0
};

RunRecord run_iterative(const QAExample& example, const RunContext& ctx,
                        Backend& backend, const RunConfig& cfg);

RunRecord run_fixed(const QAExample& example, const RunContext& ctx,
                    Backend& backend, const RunConfig& cfg);

// One record per example, in dataset order regardless of workerCount.
// Per-example failures are recorded on the RunRecord; the run continues.
std::vector<RunRecord> run_dataset(const std::vector<QAExample>& dataset,
                                   const RunContext& ctx, Backend& backend,
                                   const RunConfig& cfg);

// Run log: one JSON record per line, schema documented in docs/formats.md.
void write_run_log(const std::vector<RunRecord>& records,
                   const std::filesystem::path& path);
std::vector<RunRecord> read_run_log(const std::filesystem::path& path);

const char* to_string(RunMode mode);
std::optional<RunMode> run_mode_from_string(std::string_view s);

}  // namespace ragwin
