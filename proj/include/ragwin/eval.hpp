#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ragwin/corpus.hpp"
#include "ragwin/normalize.hpp"
#include "ragwin/orchestrator.hpp"
#include "ragwin/parsing.hpp"

// Scores run logs (EM, abstention behaviour, token usage), drives the
// ablation runners, and renders report tables.
namespace ragwin {

struct Metrics {
  double em = 0.0;
  double answeredRate = 0.0;
  double negRejectionAcc = 0.0;
  double meanNegBeforePositive = 0.0;
  double meanPromptTokens = 0.0;
  double meanOutputTokens = 0.0;
  double malformedRate = 0.0;
  long n = 0;
  // denominator bookkeeping: means over empty sets are reported as zero
  // with the corresponding count at zero
  long examplesWithPositiveWindow = 0;
  long examplesWithoutPositiveWindow = 0;
  long negativeSteps = 0;
  long totalSteps = 0;
  bool empty = false;  // n == 0; all means are zero by convention
};

// 1 iff the prediction found an answer whose normalized form equals a
// normalized gold alias. Abstentions and malformed predictions score 0.
int exact_match(const Prediction& prediction, const QAExample& example);

// Fraction of negative-window steps whose prediction is notFound.
// Throws when the records contain no negative-window steps.
double negative_rejection_accuracy(const std::vector<RunRecord>& records);

// Throws when a record's question id is missing from the dataset.
Metrics aggregate(const std::vector<RunRecord>& records,
                  const std::vector<QAExample>& dataset);

enum class AblationAxis { windowSize, order, shots, fixedSize };

struct AblationRow {
  std::string value;
  Metrics metrics;
  std::optional<std::string> error;
};

struct AblationTable {
  AblationAxis axis;
  std::vector<AblationRow> rows;
};

// One row per value, each from a full run_dataset with only that axis
// changed. Row failures are captured per row; other rows still run.
AblationTable ablate(AblationAxis axis, const std::vector<std::string>& values,
                     const RunConfig& base,
                     const std::vector<QAExample>& dataset,
                     const RunContext& ctx, Backend& backend);

enum class ReportFormat { textTable, csv };

// Deterministic serialization; all rates and means printed with 4 decimal
// places. Rendering the same input twice produces identical bytes.
void report_metrics(const Metrics& metrics, ReportFormat format,
                    const std::filesystem::path& path);
void report_table(const AblationTable& table, ReportFormat format,
                  const std::filesystem::path& path);

std::string render_metrics(const Metrics& metrics, ReportFormat format);
std::string render_table(const AblationTable& table, ReportFormat format);

const char* to_string(AblationAxis axis);
std::optional<AblationAxis> ablation_axis_from_string(std::string_view s);

}  // namespace ragwin
