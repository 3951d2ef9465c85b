#include "ragwin/orchestrator.hpp"

#include <atomic>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace ragwin {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<Exemplar> shots_for_run(const RunContext& ctx,
                                    const RunConfig& cfg) {
  if (cfg.shots == 0) return {};
  if (ctx.exemplarPool == nullptr) {
    throw std::runtime_error("shots requested but no exemplar pool loaded");
  }
  return build_shots(*ctx.exemplarPool, cfg.shots, cfg.seed);
}

StepRecord make_step(const Window& window, const Completion& completion) {
  StepRecord step;
  step.windowOrdinal = window.ordinal;
  step.windowLabel = window.label;
  step.promptTokens = completion.promptTokens;
  step.outputTokens = completion.outputTokens;
  step.prediction = parse_completion(completion.text);
  return step;
}

void finish_totals(RunRecord& record) {
  record.totalPromptTokens = 0;
  record.totalOutputTokens = 0;
  for (const StepRecord& step : record.steps) {
    record.totalPromptTokens += step.promptTokens;
    record.totalOutputTokens += step.outputTokens;
  }
}

// Runs the window sequence; found predictions stop iteration, notFound and
// malformed both continue (stopping on garbage would conflate parser
// failures with answers).
void drive_windows(RunRecord& record, const std::vector<Window>& windows,
                   const QAExample& example, const RunContext& ctx,
                   Backend& backend, const RunConfig& cfg,
                   const std::vector<Exemplar>& shots) {
  record.firstPositiveOrdinal = first_positive_ordinal(windows);
  for (const Window& window : windows) {
    Prompt prompt =
        build_prompt(ctx.tmpl, shots, window, example.question, ctx.vocab);
    Completion completion;
    try {
      completion = backend.generate({prompt, &window, &example}, cfg.genCfg);
    } catch (const BackendError& e) {
      StepRecord step;
      step.windowOrdinal = window.ordinal;
      step.windowLabel = window.label;
      step.promptTokens = prompt.tokenCount;
      step.error = e.what();
      record.steps.push_back(std::move(step));
      record.error = e.what();
      record.stoppedAt = window.ordinal;
      return;
    }
    StepRecord step = make_step(window, completion);
    const bool found = step.prediction.kind == PredictionKind::found;
    record.steps.push_back(std::move(step));
    if (found) {
      record.finalAnswer = record.steps.back().prediction.answer;
      record.stoppedAt = window.ordinal;
      return;
    }
  }
  record.stoppedAt = std::nullopt;  // exhausted
}

}  // namespace

RunRecord run_iterative(const QAExample& example, const RunContext& ctx,
                        Backend& backend, const RunConfig& cfg) {
  RunRecord record;
  record.questionId = example.id;
  record.mode = RunMode::iterative;
  record.backendName = backend.name();

  const std::vector<Exemplar> shots = shots_for_run(ctx, cfg);
  RankedList ranked = retrieve(example.question, ctx.index, ctx.vocab,
                               cfg.retrievalCfg, example.id);
  if (ranked.entries.empty()) {
    record.stoppedAt = std::nullopt;
    return record;
  }
  const std::vector<Window> windows =
      make_windows(ranked, ctx.corpus, example, cfg.windowCfg);
  drive_windows(record, windows, example, ctx, backend, cfg, shots);
  finish_totals(record);
  return record;
}

RunRecord run_fixed(const QAExample& example, const RunContext& ctx,
                    Backend& backend, const RunConfig& cfg) {
  if (cfg.fixedSize > cfg.retrievalCfg.topK) {
    throw std::runtime_error("fixedSize exceeds retrieval topK");
  }
  RunRecord record;
  record.questionId = example.id;
  record.mode = RunMode::fixed;
  record.backendName = backend.name();

  const std::vector<Exemplar> shots = shots_for_run(ctx, cfg);
  RankedList ranked = retrieve(example.question, ctx.index, ctx.vocab,
                               cfg.retrievalCfg, example.id);
  if (ranked.entries.empty()) {
    record.stoppedAt = std::nullopt;
    return record;
  }
  if (ranked.entries.size() > static_cast<size_t>(cfg.fixedSize)) {
    ranked.entries.resize(static_cast<size_t>(cfg.fixedSize));
  }
  WindowConfig wcfg;
  wcfg.windowSize = cfg.fixedSize;
  wcfg.order = WindowOrder::forward;
  const std::vector<Window> windows =
      make_windows(ranked, ctx.corpus, example, wcfg);
  drive_windows(record, windows, example, ctx, backend, cfg, shots);
  finish_totals(record);
  return record;
}

std::vector<RunRecord> run_dataset(const std::vector<QAExample>& dataset,
                                   const RunContext& ctx, Backend& backend,
                                   const RunConfig& cfg) {
  std::vector<RunRecord> records(dataset.size());
  if (dataset.empty()) return records;

  auto run_one = [&](size_t i) {
    try {
      records[i] = cfg.mode == RunMode::iterative
                       ? run_iterative(dataset[i], ctx, backend, cfg)
                       : run_fixed(dataset[i], ctx, backend, cfg);
    } catch (const std::exception& e) {
      records[i] = RunRecord{};
      records[i].questionId = dataset[i].id;
      records[i].mode = cfg.mode;
      records[i].backendName = backend.name();
      records[i].error = e.what();
    }
  };

  const int workers =
      std::max(1, std::min(cfg.workerCount, static_cast<int>(dataset.size())));
  if (workers == 1) {
    for (size_t i = 0; i < dataset.size(); ++i) run_one(i);
    return records;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < dataset.size();
           i = next.fetch_add(1)) {
        run_one(i);
      }
    });
  }
  for (auto& t : pool) t.join();
  return records;
}

namespace {

ordered_json prediction_to_json(const Prediction& pred) {
  ordered_json j;
  j["kind"] = to_string(pred.kind);
  if (pred.pageId) j["page_id"] = *pred.pageId;
  if (pred.evidence) j["evidence"] = *pred.evidence;
  if (pred.answer) j["answer"] = *pred.answer;
  if (pred.rationale) j["rationale"] = *pred.rationale;
  j["raw"] = pred.raw;
  return j;
}

Prediction prediction_from_json(const json& j) {
  Prediction pred;
  const auto kind = prediction_kind_from_string(j.value("kind", ""));
  if (!kind) {
    throw std::runtime_error("run log: unknown prediction kind");
  }
  pred.kind = *kind;
  if (j.contains("page_id")) pred.pageId = j["page_id"].get<std::string>();
  if (j.contains("evidence")) pred.evidence = j["evidence"].get<std::string>();
  if (j.contains("answer")) pred.answer = j["answer"].get<std::string>();
  if (j.contains("rationale")) {
    pred.rationale = j["rationale"].get<std::string>();
  }
  pred.raw = j.value("raw", "");
  return pred;
}

ordered_json record_to_json(const RunRecord& record) {
  ordered_json j;
  j["question_id"] = record.questionId;
  j["mode"] = to_string(record.mode);
  j["backend"] = record.backendName;
  ordered_json steps = ordered_json::array();
  for (const StepRecord& step : record.steps) {
    ordered_json s;
    s["window_ordinal"] = step.windowOrdinal;
    s["window_label"] =
        step.windowLabel == WindowLabel::positive ? "positive" : "negative";
    s["prompt_tokens"] = step.promptTokens;
    s["output_tokens"] = step.outputTokens;
    if (step.error) {
      s["error"] = *step.error;
    } else {
      s["prediction"] = prediction_to_json(step.prediction);
    }
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  if (record.finalAnswer) j["final_answer"] = *record.finalAnswer;
  if (record.stoppedAt) {
    j["stopped_at"] = *record.stoppedAt;
  } else {
    j["stopped_at"] = "exhausted";
  }
  j["total_prompt_tokens"] = record.totalPromptTokens;
  j["total_output_tokens"] = record.totalOutputTokens;
  if (record.firstPositiveOrdinal) {
    j["first_positive_ordinal"] = *record.firstPositiveOrdinal;
  }
  if (record.error) j["error"] = *record.error;
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord record;
  record.questionId = j.at("question_id").get<std::string>();
  const auto mode = run_mode_from_string(j.value("mode", ""));
  if (!mode) throw std::runtime_error("run log: unknown mode");
  record.mode = *mode;
  record.backendName = j.value("backend", "");
  for (const auto& s : j.at("steps")) {
    StepRecord step;
    step.windowOrdinal = s.at("window_ordinal").get<int>();
    step.windowLabel = s.at("window_label").get<std::string>() == "positive"
                           ? WindowLabel::positive
                           : WindowLabel::negative;
    step.promptTokens = s.at("prompt_tokens").get<long>();
    step.outputTokens = s.at("output_tokens").get<long>();
    if (s.contains("error")) {
      step.error = s["error"].get<std::string>();
    } else {
      step.prediction = prediction_from_json(s.at("prediction"));
    }
    record.steps.push_back(std::move(step));
  }
  if (j.contains("final_answer")) {
    record.finalAnswer = j["final_answer"].get<std::string>();
  }
  const auto& stopped = j.at("stopped_at");
  if (stopped.is_number_integer()) {
    record.stoppedAt = stopped.get<int>();
  } else {
    record.stoppedAt = std::nullopt;
  }
  record.totalPromptTokens = j.value("total_prompt_tokens", 0L);
  record.totalOutputTokens = j.value("total_output_tokens", 0L);
  if (j.contains("first_positive_ordinal")) {
    record.firstPositiveOrdinal = j["first_positive_ordinal"].get<int>();
  }
  if (j.contains("error")) record.error = j["error"].get<std::string>();
  return record;
}

}  // namespace

void write_run_log(const std::vector<RunRecord>& records,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write run log " + path.string());
  }
  for (const RunRecord& record : records) {
    out << record_to_json(record).dump() << '\n';
  }
}

std::vector<RunRecord> read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open run log " + path.string());
  }
  std::vector<RunRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed run log record");
    }
    records.push_back(record_from_json(j));
  }
  return records;
}

const char* to_string(RunMode mode) {
  return mode == RunMode::iterative ? "iterative" : "fixed";
}

std::optional<RunMode> run_mode_from_string(std::string_view s) {
  if (s == "iterative") return RunMode::iterative;
  if (s == "fixed") return RunMode::fixed;
  return std::nullopt;
}

}  // namespace ragwin
