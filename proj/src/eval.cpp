#include "ragwin/eval.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ragwin {

int exact_match(const Prediction& prediction, const QAExample& example) {
  if (prediction.kind != PredictionKind::found || !prediction.answer) return 0;
  const std::string predicted = normalize_answer(*prediction.answer);
  for (const std::string& alias : example.answers) {
    if (predicted == normalize_answer(alias)) return 1;
  }
  return 0;
}

double negative_rejection_accuracy(const std::vector<RunRecord>& records) {
  long negatives = 0;
  long rejected = 0;
  for (const RunRecord& record : records) {
    for (const StepRecord& step : record.steps) {
      if (step.windowLabel != WindowLabel::negative || step.error) continue;
      ++negatives;
      if (step.prediction.kind == PredictionKind::notFound) ++rejected;
    }
  }
  if (negatives == 0) {
    throw std::runtime_error(
        "negative rejection accuracy undefined: no negative-window steps");
  }
  return static_cast<double>(rejected) / static_cast<double>(negatives);
}

Metrics aggregate(const std::vector<RunRecord>& records,
                  const std::vector<QAExample>& dataset) {
  std::unordered_map<std::string, const QAExample*> by_id;
  by_id.reserve(dataset.size());
  for (const QAExample& ex : dataset) by_id.emplace(ex.id, &ex);

  Metrics m;
  m.n = static_cast<long>(records.size());
  if (records.empty()) {
    m.empty = true;
    return m;
  }

  long em_sum = 0;
  long answered = 0;
  long neg_steps = 0, neg_rejected = 0;
  long malformed_steps = 0, total_steps = 0;
  long neg_before_pos_sum = 0;
  long prompt_tokens = 0, output_tokens = 0;

  for (const RunRecord& record : records) {
    auto it = by_id.find(record.questionId);
    if (it == by_id.end()) {
      throw std::runtime_error("run log question id \"" + record.questionId +
                               "\" not present in the dataset");
    }
    const QAExample& example = *it->second;

    if (record.finalAnswer) {
      ++answered;
      // score the found step's prediction
      for (const StepRecord& step : record.steps) {
        if (step.prediction.kind == PredictionKind::found) {
          em_sum += exact_match(step.prediction, example);
          break;
        }
      }
    }
    for (const StepRecord& step : record.steps) {
      if (step.error) continue;
      ++total_steps;
      if (step.prediction.kind == PredictionKind::malformed) ++malformed_steps;
      if (step.windowLabel == WindowLabel::negative) {
        ++neg_steps;
        if (step.prediction.kind == PredictionKind::notFound) ++neg_rejected;
      }
    }
    if (record.firstPositiveOrdinal) {
      ++m.examplesWithPositiveWindow;
      neg_before_pos_sum += *record.firstPositiveOrdinal;
    } else {
      ++m.examplesWithoutPositiveWindow;
    }
    prompt_tokens += record.totalPromptTokens;
    output_tokens += record.totalOutputTokens;
  }

  const double n = static_cast<double>(m.n);
  m.em = static_cast<double>(em_sum) / n;
  m.answeredRate = static_cast<double>(answered) / n;
  m.negRejectionAcc =
      neg_steps == 0
          ? 0.0
          : static_cast<double>(neg_rejected) / static_cast<double>(neg_steps);
  m.meanNegBeforePositive =
      m.examplesWithPositiveWindow == 0
          ? 0.0
          : static_cast<double>(neg_before_pos_sum) /
                static_cast<double>(m.examplesWithPositiveWindow);
  m.meanPromptTokens = static_cast<double>(prompt_tokens) / n;
  m.meanOutputTokens = static_cast<double>(output_tokens) / n;
  m.malformedRate = total_steps == 0
                        ? 0.0
                        : static_cast<double>(malformed_steps) /
                              static_cast<double>(total_steps);
  m.negativeSteps = neg_steps;
  m.totalSteps = total_steps;
  return m;
}

namespace {

RunConfig config_for(AblationAxis axis, const std::string& value,
                     const RunConfig& base) {
  RunConfig cfg = base;
  auto to_int = [&](const std::string& s) {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size() || v <= 0) {
      throw std::runtime_error("invalid ablation value \"" + s + "\"");
    }
    return v;
  };
  switch (axis) {
    case AblationAxis::windowSize:
      cfg.mode = RunMode::iterative;
      cfg.windowCfg.windowSize = to_int(value);
      break;
    case AblationAxis::order:
      cfg.mode = RunMode::iterative;
      if (value == "forward") {
        cfg.windowCfg.order = WindowOrder::forward;
      } else if (value == "backward") {
        cfg.windowCfg.order = WindowOrder::backward;
      } else {
        throw std::runtime_error("invalid order \"" + value +
                                 "\" (expected forward or backward)");
      }
      break;
    case AblationAxis::shots: {
      size_t pos = 0;
      const int v = std::stoi(value, &pos);
      if (pos != value.size() || v < 0 || v % 2 != 0) {
        throw std::runtime_error("invalid shot count \"" + value + "\"");
      }
      cfg.shots = v;
      break;
    }
    case AblationAxis::fixedSize:
      cfg.mode = RunMode::fixed;
      cfg.fixedSize = to_int(value);
      break;
  }
  return cfg;
}

}  // namespace

AblationTable ablate(AblationAxis axis, const std::vector<std::string>& values,
                     const RunConfig& base,
                     const std::vector<QAExample>& dataset,
                     const RunContext& ctx, Backend& backend) {
  if (values.empty()) {
    throw std::runtime_error("ablation needs at least one axis value");
  }
  AblationTable table;
  table.axis = axis;
  for (const std::string& value : values) {
    AblationRow row;
    row.value = value;
    try {
      const RunConfig cfg = config_for(axis, value, base);
      const std::vector<RunRecord> records =
          run_dataset(dataset, ctx, backend, cfg);
      row.metrics = aggregate(records, dataset);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

const std::vector<std::pair<std::string, std::string (*)(const Metrics&)>>&
metric_columns() {
  static const std::vector<std::pair<std::string, std::string (*)(const Metrics&)>>
      cols = {
          {"n", [](const Metrics& m) { return std::to_string(m.n); }},
          {"em", [](const Metrics& m) { return fmt4(m.em); }},
          {"answered_rate",
           [](const Metrics& m) { return fmt4(m.answeredRate); }},
          {"neg_rejection_acc",
           [](const Metrics& m) { return fmt4(m.negRejectionAcc); }},
          {"mean_neg_before_positive",
           [](const Metrics& m) { return fmt4(m.meanNegBeforePositive); }},
          {"mean_prompt_tokens",
           [](const Metrics& m) { return fmt4(m.meanPromptTokens); }},
          {"mean_output_tokens",
           [](const Metrics& m) { return fmt4(m.meanOutputTokens); }},
          {"malformed_rate",
           [](const Metrics& m) { return fmt4(m.malformedRate); }},
          {"examples_with_positive_window",
           [](const Metrics& m) {
             return std::to_string(m.examplesWithPositiveWindow);
           }},
          {"examples_without_positive_window",
           [](const Metrics& m) {
             return std::to_string(m.examplesWithoutPositiveWindow);
           }},
          {"empty", [](const Metrics& m) {
             return std::string(m.empty ? "true" : "false");
           }},
      };
  return cols;
}

std::string render_rows_csv(const std::string& key_header,
                            const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << key_header;
  for (const auto& [name, _] : metric_columns()) out << ',' << name;
  out << ",error\n";
  for (const AblationRow& row : rows) {
    out << row.value;
    for (const auto& [_, get] : metric_columns()) {
      out << ',' << (row.error ? "" : get(row.metrics));
    }
    out << ',' << (row.error ? *row.error : "") << '\n';
  }
  return out.str();
}

std::string render_rows_text(const std::string& key_header,
                             const std::vector<AblationRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{key_header};
  for (const auto& [name, _] : metric_columns()) header.push_back(name);
  header.push_back("error");
  cells.push_back(header);
  for (const AblationRow& row : rows) {
    std::vector<std::string> line{row.value};
    for (const auto& [_, get] : metric_columns()) {
      line.push_back(row.error ? "-" : get(row.metrics));
    }
    line.push_back(row.error ? *row.error : "-");
    cells.push_back(std::move(line));
  }
  std::vector<size_t> widths(cells.front().size(), 0);
  for (const auto& line : cells) {
    for (size_t c = 0; c < line.size(); ++c) {
      widths[c] = std::max(widths[c], line[c].size());
    }
  }
  std::ostringstream out;
  for (size_t r = 0; r < cells.size(); ++r) {
    for (size_t c = 0; c < cells[r].size(); ++c) {
      if (c > 0) out << "  ";
      out << cells[r][c]
          << std::string(widths[c] - cells[r][c].size(), ' ');
    }
    out << '\n';
    if (r == 0) {
      size_t total = 0;
      for (size_t c = 0; c < widths.size(); ++c) {
        total += widths[c] + (c > 0 ? 2 : 0);
      }
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

void write_file(const std::string& content, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write report file " + path.string());
  }
  out << content;
}

}  // namespace

std::string render_metrics(const Metrics& metrics, ReportFormat format) {
  std::vector<AblationRow> rows(1);
  rows[0].value = "all";
  rows[0].metrics = metrics;
  return format == ReportFormat::csv ? render_rows_csv("scope", rows)
                                     : render_rows_text("scope", rows);
}

std::string render_table(const AblationTable& table, ReportFormat format) {
  const std::string key = to_string(table.axis);
  return format == ReportFormat::csv ? render_rows_csv(key, table.rows)
                                     : render_rows_text(key, table.rows);
}

void report_metrics(const Metrics& metrics, ReportFormat format,
                    const std::filesystem::path& path) {
  write_file(render_metrics(metrics, format), path);
}

void report_table(const AblationTable& table, ReportFormat format,
                  const std::filesystem::path& path) {
  write_file(render_table(table, format), path);
}

const char* to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::windowSize:
      return "window-size";
    case AblationAxis::order:
      return "order";
    case AblationAxis::shots:
      return "shots";
    case AblationAxis::fixedSize:
      return "fixed-size";
  }
  return "window-size";
}

std::optional<AblationAxis> ablation_axis_from_string(std::string_view s) {
  if (s == "window-size") return AblationAxis::windowSize;
  if (s == "order") return AblationAxis::order;
  if (s == "shots") return AblationAxis::shots;
  if (s == "fixed-size") return AblationAxis::fixedSize;
  return std::nullopt;
}

}  // namespace ragwin
