#include "ragwin/parsing.hpp"

#include <vector>

#include "ragwin/text.hpp"

namespace ragwin {

namespace {

std::string_view trim_ascii(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r' || s.front() == '\n')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

// Drops a leading ``` line and a matching trailing ``` line, if present.
std::string_view strip_fences(std::string_view text) {
  std::string_view t = trim_ascii(text);
  if (t.substr(0, 3) != "```") return text;
  const size_t first_nl = t.find('\n');
  if (first_nl == std::string_view::npos) return text;
  std::string_view body = t.substr(first_nl + 1);
  const size_t closing = body.rfind("```");
  if (closing == std::string_view::npos) return body;
  return body.substr(0, closing);
}

bool iequals_ascii(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    char ca = a[i];
    char cb = b[i];
    if (ca >= 'A' && ca <= 'Z') ca += 0x20;
    if (cb >= 'A' && cb <= 'Z') cb += 0x20;
    if (ca != cb) return false;
  }
  return true;
}

// Matches "<key> : <value>" with a case-insensitive key; returns the value.
std::optional<std::string_view> match_key(std::string_view line,
                                          std::string_view key) {
  line = trim_ascii(line);
  if (line.size() < key.size()) return std::nullopt;
  if (!iequals_ascii(line.substr(0, key.size()), key)) return std::nullopt;
  std::string_view rest = line.substr(key.size());
  rest = trim_ascii(rest);
  if (rest.empty() || rest.front() != ':') return std::nullopt;
  rest.remove_prefix(1);
  return trim_ascii(rest);
}

bool is_abstain_phrase(std::string_view value) {
  return fold_case_trim(value) == kAbstainMarker;
}

}  // namespace

Prediction parse_completion(std::string_view text) {
  Prediction pred;
  pred.raw.assign(text);

  const std::string_view body = strip_fences(text);
  std::optional<std::string> page_id, evidence, answer, rationale;
  bool saw_answer_key = false;
  for (std::string_view line : split_lines(body)) {
    if (!page_id) {
      if (auto v = match_key(line, "PAGE_ID")) page_id = std::string(*v);
    }
    if (!evidence) {
      if (auto v = match_key(line, "EVIDENCE")) evidence = std::string(*v);
    }
    if (!rationale) {
      if (auto v = match_key(line, "RATIONALE")) rationale = std::string(*v);
    }
    if (!saw_answer_key) {
      if (auto v = match_key(line, "ANSWER")) {
        saw_answer_key = true;
        answer = std::string(*v);
      }
    }
  }

  pred.pageId = std::move(page_id);
  pred.evidence = std::move(evidence);
  pred.rationale = std::move(rationale);

  if (saw_answer_key) {
    if (is_abstain_phrase(*answer)) {
      pred.kind = PredictionKind::notFound;
      return pred;
    }
    if (answer->empty()) {
      pred.kind = PredictionKind::malformed;
      return pred;
    }
    pred.kind = PredictionKind::found;
    pred.answer = std::move(answer);
    return pred;
  }

  if (is_abstain_phrase(body)) {
    pred.kind = PredictionKind::notFound;
    return pred;
  }
  pred.kind = PredictionKind::malformed;
  return pred;
}

bool is_abstention(std::string_view text) {
  const std::string_view body = strip_fences(text);
  for (std::string_view line : split_lines(body)) {
    if (auto v = match_key(line, "ANSWER")) {
      return is_abstain_phrase(*v);
    }
  }
  return is_abstain_phrase(body);
}

const char* to_string(PredictionKind kind) {
  switch (kind) {
    case PredictionKind::found:
      return "found";
    case PredictionKind::notFound:
      return "not_found";
    case PredictionKind::malformed:
      return "malformed";
  }
  return "malformed";
}

std::optional<PredictionKind> prediction_kind_from_string(std::string_view s) {
  if (s == "found") return PredictionKind::found;
  if (s == "not_found") return PredictionKind::notFound;
  if (s == "malformed") return PredictionKind::malformed;
  return std::nullopt;
}

}  // namespace ragwin
