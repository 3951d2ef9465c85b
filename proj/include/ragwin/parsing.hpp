#pragma once

#include <optional>
#include <string>
#include <string_view>

// Converts raw completion text into a structured prediction. The canonical
// output grammar the model is instructed to follow:
//
//   PAGE_ID: <id>
//   EVIDENCE: <verbatim sentence(s)>
//   ANSWER: <short answer>
//
// or, when no page answers the question, the single line
//
//   ANSWER: answer not found
//
// with an optional "RATIONALE: <text>" line. Keys are matched
// case-insensitively with tolerant whitespace; markdown code fences are
// stripped. Anything else parses as malformed (a value, not an error).
namespace ragwin {

inline constexpr std::string_view kAbstainMarker = "answer not found";

enum class PredictionKind { found, notFound, malformed };

struct Prediction {
  PredictionKind kind = PredictionKind::malformed;
  std::optional<std::string> pageId;
  std::optional<std::string> evidence;
  std::optional<std::string> answer;  // non-empty iff kind == found
  std::optional<std::string> rationale;
  std::string raw;  // original completion text, always preserved
};

Prediction parse_completion(std::string_view text);

// True iff the ANSWER field (or the whole trimmed text when no field is
// present) equals the abstention phrase after trimming and casefolding.
// Strict equality: "answer not found in page p3" is not an abstention.
bool is_abstention(std::string_view text);

const char* to_string(PredictionKind kind);
std::optional<PredictionKind> prediction_kind_from_string(std::string_view s);

}  // namespace ragwin
