// ragwin: page-level BM25 retrieval + sliding-window prompting pipeline.
//
// Subcommands: build-index, retrieve, run, ablate, negatives, report.
// Exit codes: 0 success, 1 configuration/IO error, 2 backend unreachable.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ragwin/bm25.hpp"
#include "ragwin/corpus.hpp"
#include "ragwin/eval.hpp"
#include "ragwin/llm.hpp"
#include "ragwin/orchestrator.hpp"
#include "ragwin/parsing.hpp"
#include "ragwin/prompting.hpp"
#include "ragwin/windowing.hpp"
#include "ragwin/wordpiece.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ragwin;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitBackend = 2;

struct Options {
  std::string configPath;

  std::string corpus, dataset, vocab, index, out;
  std::string templatePath, exemplars, runLog;
  std::string question;

  std::string mode = "iterative";
  std::string order = "forward";
  std::string backend = "oracle";
  std::string endpoint, model;
  std::string axis;
  std::vector<std::string> values;

  int windowSize = 60;
  int topK = 200;
  int shots = 0;
  int fixedSize = 100;
  int workers = 1;
  int maxWindows = 0;  // 0 = no explicit cap
  int maxOutputTokens = 256;
  double k1 = 0.9;
  double b = 0.8;
  double falseAnswerProb = 0.543;
  std::uint64_t seed = 0;
  bool force = false;
};

// Plain key=value config file; keys are the long flag names without the
// leading dashes. Values are applied as defaults, so flags given on the
// command line always win. Paths are resolved relative to the config
// file's directory.
void apply_config_file(const std::string& path, Options& opt) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path);
  }
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& value) {
    fs::path p(value);
    return p.is_absolute() ? p.string() : (base / p).string();
  };
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key=value");
    }
    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t");
      const size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "corpus") opt.corpus = resolve(value);
    else if (key == "dataset") opt.dataset = resolve(value);
    else if (key == "vocab") opt.vocab = resolve(value);
    else if (key == "index") opt.index = resolve(value);
    else if (key == "out") opt.out = resolve(value);
    else if (key == "template") opt.templatePath = resolve(value);
    else if (key == "exemplars") opt.exemplars = resolve(value);
    else if (key == "run-log") opt.runLog = resolve(value);
    else if (key == "question") opt.question = value;
    else if (key == "mode") opt.mode = value;
    else if (key == "order") opt.order = value;
    else if (key == "backend") opt.backend = value;
    else if (key == "endpoint") opt.endpoint = value;
    else if (key == "model") opt.model = value;
    else if (key == "axis") opt.axis = value;
    else if (key == "window-size") opt.windowSize = std::stoi(value);
    else if (key == "top-k") opt.topK = std::stoi(value);
    else if (key == "shots") opt.shots = std::stoi(value);
    else if (key == "fixed-size") opt.fixedSize = std::stoi(value);
    else if (key == "workers") opt.workers = std::stoi(value);
    else if (key == "max-windows") opt.maxWindows = std::stoi(value);
    else if (key == "max-output-tokens") opt.maxOutputTokens = std::stoi(value);
    else if (key == "k1") opt.k1 = std::stod(value);
    else if (key == "b") opt.b = std::stod(value);
    else if (key == "false-answer-prob") opt.falseAnswerProb = std::stod(value);
    else if (key == "seed") opt.seed = std::stoull(value);
    else if (key == "force") opt.force = (value == "true" || value == "1");
    else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown config key \"" + key + "\"");
    }
  }
}

void require_path(const std::string& value, const std::string& flag) {
  if (value.empty()) {
    throw std::runtime_error("missing required option " + flag);
  }
  if (!fs::exists(value)) {
    throw std::runtime_error(flag + " path does not exist: " + value);
  }
}

WindowOrder parse_order(const std::string& order) {
  if (order == "forward") return WindowOrder::forward;
  if (order == "backward") return WindowOrder::backward;
  throw std::runtime_error("invalid --order \"" + order +
                           "\" (expected forward or backward)");
}

RunConfig make_run_config(const Options& opt) {
  RunConfig cfg;
  cfg.windowCfg.windowSize = opt.windowSize;
  cfg.windowCfg.order = parse_order(opt.order);
  if (opt.maxWindows > 0) cfg.windowCfg.maxWindows = opt.maxWindows;
  cfg.retrievalCfg.topK = opt.topK;
  cfg.shots = opt.shots;
  cfg.genCfg.maxOutputTokens = opt.maxOutputTokens;
  if (opt.mode == "iterative") {
    cfg.mode = RunMode::iterative;
  } else if (opt.mode == "fixed") {
    cfg.mode = RunMode::fixed;
  } else {
    throw std::runtime_error("invalid --mode \"" + opt.mode +
                             "\" (expected iterative or fixed)");
  }
  cfg.fixedSize = opt.fixedSize;
  if (cfg.mode == RunMode::fixed && cfg.fixedSize > cfg.retrievalCfg.topK) {
    throw std::runtime_error("--fixed-size must not exceed --top-k");
  }
  cfg.workerCount = opt.workers;
  cfg.seed = opt.seed;
  return cfg;
}

std::unique_ptr<Backend> make_cli_backend(const Options& opt,
                                          const Vocab& vocab) {
  HallucinatorConfig hall;
  hall.falseAnswerProb = opt.falseAnswerProb;
  hall.seed = opt.seed;
  HttpBackendConfig http;
  http.endpoint = opt.endpoint;
  http.model = opt.model;
  if (const char* token = std::getenv("RAGWIN_API_TOKEN")) {
    http.authToken = token;
  }
  if (opt.backend == "http" && opt.endpoint.empty()) {
    throw std::runtime_error("--backend http needs --endpoint");
  }
  return make_backend(opt.backend, vocab, hall, http);
}

struct LoadedRun {
  Corpus corpus;
  std::vector<QAExample> dataset;
  Vocab vocab;
  Index index;
  PromptTemplate tmpl;
  std::vector<Exemplar> pool;
};

LoadedRun load_run_inputs(const Options& opt, bool need_dataset) {
  LoadedRun lr;
  require_path(opt.corpus, "--corpus");
  require_path(opt.vocab, "--vocab");
  lr.corpus = load_corpus(opt.corpus);
  lr.vocab = load_vocab(opt.vocab);
  if (need_dataset) {
    require_path(opt.dataset, "--dataset");
    lr.dataset = load_dataset(opt.dataset);
    const ValidationReport links = validate_links(lr.corpus, lr.dataset);
    if (!links.ok()) {
      std::cerr << "warning: " << links.dangling.size()
                << " gold page id(s) missing from the corpus (first: "
                << links.dangling.front() << ")\n";
    }
  }
  if (!opt.index.empty()) {
    require_path(opt.index, "--index");
    lr.index = load_index(opt.index);
    if (lr.index.vocabFingerprint() != lr.vocab.fingerprint()) {
      throw std::runtime_error(
          "index was built with a different vocabulary (fingerprint "
          "mismatch); rebuild it or pass the matching vocab");
    }
  } else {
    BM25Params params;
    params.k1 = opt.k1;
    params.b = opt.b;
    lr.index = build_index(lr.corpus, lr.vocab, params);
  }
  lr.tmpl = opt.templatePath.empty() ? default_template()
                                     : load_template(opt.templatePath);
  if (!opt.exemplars.empty()) {
    require_path(opt.exemplars, "--exemplars");
    lr.pool = load_exemplars(opt.exemplars, lr.corpus);
  }
  return lr;
}

// every example failed against a remote backend -> treat it as unreachable
bool backend_unreachable(const std::vector<RunRecord>& records,
                         const std::string& backend_kind) {
  if (backend_kind != "http" || records.empty()) return false;
  for (const RunRecord& record : records) {
    if (!record.error) return false;
  }
  return true;
}

int cmd_build_index(const Options& opt) {
  require_path(opt.corpus, "--corpus");
  require_path(opt.vocab, "--vocab");
  if (opt.out.empty()) {
    throw std::runtime_error("missing required option --out");
  }
  if (fs::exists(opt.out) && !fs::is_empty(opt.out) && !opt.force) {
    std::cerr << "refusing to overwrite existing index directory " << opt.out
              << " (use --force)\n";
    return kExitConfig;
  }
  const Corpus corpus = load_corpus(opt.corpus);
  const Vocab vocab = load_vocab(opt.vocab);
  BM25Params params;
  params.k1 = opt.k1;
  params.b = opt.b;
  const Index index = build_index(corpus, vocab, params);
  save_index(index, opt.out);
  std::cout << "indexed " << index.docCount() << " pages, avgdl "
            << index.avgdl() << ", vocab size " << vocab.size() << "\n";
  return kExitOk;
}

int cmd_retrieve(const Options& opt) {
  if (opt.question.empty()) {
    throw std::runtime_error("missing required option --question");
  }
  Options local = opt;
  LoadedRun lr = load_run_inputs(local, /*need_dataset=*/false);
  RetrievalConfig rc;
  rc.topK = opt.topK;
  const RankedList ranked =
      retrieve(opt.question, lr.index, lr.vocab, rc, "query");
  char buf[64];
  for (size_t i = 0; i < ranked.entries.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f", ranked.entries[i].score);
    std::cout << (i + 1) << "\t" << ranked.entries[i].pageId << "\t" << buf
              << "\n";
  }
  if (ranked.entries.empty()) {
    std::cout << "(no matching pages)\n";
  }
  return kExitOk;
}

int cmd_run(const Options& opt) {
  LoadedRun lr = load_run_inputs(opt, /*need_dataset=*/true);
  if (opt.out.empty()) {
    throw std::runtime_error("missing required option --out");
  }
  fs::create_directories(opt.out);
  const RunConfig cfg = make_run_config(opt);
  std::unique_ptr<Backend> backend = make_cli_backend(opt, lr.vocab);
  RunContext ctx{lr.corpus, lr.index, lr.vocab, lr.tmpl,
                 lr.pool.empty() ? nullptr : &lr.pool};

  const std::vector<RunRecord> records =
      run_dataset(lr.dataset, ctx, *backend, cfg);
  write_run_log(records, fs::path(opt.out) / "run_log.jsonl");
  const Metrics metrics = aggregate(records, lr.dataset);
  report_metrics(metrics, ReportFormat::csv, fs::path(opt.out) / "metrics.csv");
  report_metrics(metrics, ReportFormat::textTable,
                 fs::path(opt.out) / "metrics.txt");
  std::cout << render_metrics(metrics, ReportFormat::textTable);
  long failures = 0;
  for (const RunRecord& r : records) {
    if (r.error) ++failures;
  }
  if (failures > 0) {
    std::cerr << failures << " example(s) failed; see run log\n";
  }
  if (backend_unreachable(records, opt.backend)) return kExitBackend;
  return kExitOk;
}

int cmd_ablate(const Options& opt) {
  const auto axis = ablation_axis_from_string(opt.axis);
  if (!axis) {
    std::cerr << "invalid --axis \"" << opt.axis
              << "\"; valid axes: window-size, order, shots, fixed-size\n";
    return kExitConfig;
  }
  if (opt.values.empty()) {
    throw std::runtime_error("missing required option --values");
  }
  LoadedRun lr = load_run_inputs(opt, /*need_dataset=*/true);
  if (opt.out.empty()) {
    throw std::runtime_error("missing required option --out");
  }
  fs::create_directories(opt.out);
  const RunConfig cfg = make_run_config(opt);
  std::unique_ptr<Backend> backend = make_cli_backend(opt, lr.vocab);
  RunContext ctx{lr.corpus, lr.index, lr.vocab, lr.tmpl,
                 lr.pool.empty() ? nullptr : &lr.pool};

  const AblationTable table =
      ablate(*axis, opt.values, cfg, lr.dataset, ctx, *backend);
  report_table(table, ReportFormat::csv,
               fs::path(opt.out) / ("ablation_" + opt.axis + ".csv"));
  report_table(table, ReportFormat::textTable,
               fs::path(opt.out) / ("ablation_" + opt.axis + ".txt"));
  std::cout << render_table(table, ReportFormat::textTable);
  return kExitOk;
}

int cmd_negatives(const Options& opt) {
  LoadedRun lr = load_run_inputs(opt, /*need_dataset=*/true);
  const RunConfig cfg = make_run_config(opt);
  std::unique_ptr<Backend> backend = make_cli_backend(opt, lr.vocab);

  std::vector<RunRecord> records;
  long eligible = 0, rejected = 0, errors = 0;
  for (const QAExample& example : lr.dataset) {
    const RankedList ranked = retrieve(example.question, lr.index, lr.vocab,
                                       cfg.retrievalCfg, example.id);
    if (ranked.entries.empty()) continue;
    const std::optional<Window> window = construct_negative_window(
        ranked, lr.corpus, example, cfg.windowCfg.windowSize);
    if (!window) continue;
    ++eligible;
    RunRecord record;
    record.questionId = example.id;
    record.mode = RunMode::iterative;
    record.backendName = backend->name();
    record.firstPositiveOrdinal = std::nullopt;
    const Prompt prompt = build_prompt(lr.tmpl, {}, *window, example.question,
                                       lr.vocab);
    try {
      const Completion completion =
          backend->generate({prompt, &*window, &example}, cfg.genCfg);
      StepRecord step;
      step.windowOrdinal = window->ordinal;
      step.windowLabel = window->label;
      step.promptTokens = completion.promptTokens;
      step.outputTokens = completion.outputTokens;
      step.prediction = parse_completion(completion.text);
      if (step.prediction.kind == PredictionKind::notFound) ++rejected;
      record.steps.push_back(std::move(step));
      record.stoppedAt = window->ordinal;
    } catch (const BackendError& e) {
      ++errors;
      record.error = e.what();
    }
    record.totalPromptTokens = prompt.tokenCount;
    records.push_back(std::move(record));
  }
  if (eligible == 0) {
    std::cerr << "0 eligible examples: every window of size "
              << cfg.windowCfg.windowSize
              << " contains a relevant page (or retrieval returned nothing)\n";
    return kExitConfig;
  }
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    write_run_log(records, fs::path(opt.out) / "negatives_log.jsonl");
  }
  const long answered = eligible - errors;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f",
                answered == 0 ? 0.0
                              : static_cast<double>(rejected) /
                                    static_cast<double>(answered));
  std::cout << "negative windows: " << eligible << ", rejected: " << rejected
            << ", rejection accuracy: " << buf << "\n";
  if (errors == eligible && errors > 0) return kExitBackend;
  return kExitOk;
}

int cmd_report(const Options& opt) {
  require_path(opt.runLog, "--run-log");
  require_path(opt.dataset, "--dataset");
  const std::vector<RunRecord> records = read_run_log(opt.runLog);
  const std::vector<QAExample> dataset = load_dataset(opt.dataset);
  const Metrics metrics = aggregate(records, dataset);
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    report_metrics(metrics, ReportFormat::csv,
                   fs::path(opt.out) / "metrics.csv");
    report_metrics(metrics, ReportFormat::textTable,
                   fs::path(opt.out) / "metrics.txt");
  }
  std::cout << render_metrics(metrics, ReportFormat::textTable);
  return kExitOk;
}

void add_data_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--corpus", opt.corpus, "corpus JSONL file");
  cmd->add_option("--dataset", opt.dataset, "dataset JSONL file");
  cmd->add_option("--vocab", opt.vocab, "wordpiece vocab file");
  cmd->add_option("--index", opt.index,
                  "index directory (omit to build in memory)");
  cmd->add_option("--template", opt.templatePath, "prompt template file");
  cmd->add_option("--exemplars", opt.exemplars, "exemplar pool JSONL file");
  cmd->add_option("--out", opt.out, "output directory");
}

void add_run_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--mode", opt.mode, "iterative or fixed");
  cmd->add_option("--window-size", opt.windowSize, "pages per window");
  cmd->add_option("--top-k", opt.topK, "retrieval depth");
  cmd->add_option("--order", opt.order, "forward or backward");
  cmd->add_option("--shots", opt.shots, "few-shot exemplar count (even)");
  cmd->add_option("--fixed-size", opt.fixedSize, "pages in fixed mode");
  cmd->add_option("--backend", opt.backend, "oracle, hallucinator, or http");
  cmd->add_option("--endpoint", opt.endpoint, "http backend URL");
  cmd->add_option("--model", opt.model, "model name for the http backend");
  cmd->add_option("--workers", opt.workers, "parallel examples");
  cmd->add_option("--seed", opt.seed, "seed for mock backends and shots");
  cmd->add_option("--max-windows", opt.maxWindows,
                  "cap on windows per question (0 = no cap)");
  cmd->add_option("--max-output-tokens", opt.maxOutputTokens,
                  "generation budget per window");
  cmd->add_option("--false-answer-prob", opt.falseAnswerProb,
                  "hallucinator fabrication probability");
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;

  // --config is honored before regular parsing so its values act as
  // defaults that explicit flags override
  for (int i = 1; i < argc - 1; ++i) {
    if (std::string_view(argv[i]) == "--config") {
      opt.configPath = argv[i + 1];
    }
  }
  try {
    if (!opt.configPath.empty()) apply_config_file(opt.configPath, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App app{"page-level BM25 retrieval + sliding-window prompting"};
  app.require_subcommand(1);
  std::string config_sink;
  app.add_option("--config", config_sink, "key=value config file");

  auto* build = app.add_subcommand("build-index", "build and save a BM25 index");
  add_data_options(build, opt);
  build->add_option("--k1", opt.k1, "BM25 term-frequency saturation");
  build->add_option("--b", opt.b, "BM25 length normalization");
  build->add_flag("--force", opt.force, "overwrite an existing index dir");

  auto* retr = app.add_subcommand("retrieve", "print top-K pages for a question");
  add_data_options(retr, opt);
  retr->add_option("--question", opt.question, "query text")->required();
  retr->add_option("--top-k", opt.topK, "retrieval depth");
  retr->add_option("--k1", opt.k1, "BM25 term-frequency saturation");
  retr->add_option("--b", opt.b, "BM25 length normalization");

  auto* run = app.add_subcommand("run", "run the pipeline over a dataset");
  add_data_options(run, opt);
  add_run_options(run, opt);
  run->add_option("--k1", opt.k1, "BM25 term-frequency saturation");
  run->add_option("--b", opt.b, "BM25 length normalization");

  auto* abl = app.add_subcommand("ablate", "run an ablation axis");
  add_data_options(abl, opt);
  add_run_options(abl, opt);
  abl->add_option("--axis", opt.axis,
                  "window-size, order, shots, or fixed-size")
      ->required();
  abl->add_option("--values", opt.values, "axis values")
      ->required()
      ->delimiter(',');

  auto* neg = app.add_subcommand(
      "negatives", "query the backend on constructed negative windows");
  add_data_options(neg, opt);
  add_run_options(neg, opt);

  auto* rep = app.add_subcommand("report", "re-score an existing run log");
  rep->add_option("--run-log", opt.runLog, "run log JSONL file")->required();
  rep->add_option("--dataset", opt.dataset, "dataset JSONL file");
  rep->add_option("--out", opt.out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return cmd_build_index(opt);
    if (retr->parsed()) return cmd_retrieve(opt);
    if (run->parsed()) return cmd_run(opt);
    if (abl->parsed()) return cmd_ablate(opt);
    if (neg->parsed()) return cmd_negatives(opt);
    if (rep->parsed()) return cmd_report(opt);
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
