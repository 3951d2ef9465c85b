#include "ragwin/prompting.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ragwin/normalize.hpp"
#include "ragwin/parsing.hpp"
#include "ragwin/rng.hpp"

namespace ragwin {

namespace {

std::string replace_all(std::string text, std::string_view from,
                        std::string_view to) {
  size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

void validate_template(const PromptTemplate& tmpl, const std::string& origin) {
  if (tmpl.systemInstruction.find(kAbstainMarker) == std::string::npos) {
    throw std::runtime_error(origin +
                             ": system instruction does not contain the "
                             "abstention phrase \"" +
                             std::string(kAbstainMarker) + "\"");
  }
  for (const char* ph : {"{id}", "{title}", "{content}"}) {
    if (tmpl.pageFormat.find(ph) == std::string::npos) {
      throw std::runtime_error(origin + ": page section lacks placeholder " +
                               ph);
    }
  }
  if (tmpl.questionFormat.find("{question}") == std::string::npos) {
    throw std::runtime_error(origin +
                             ": question section lacks placeholder {question}");
  }
}

constexpr std::string_view kDefaultSystem =
    R"(You are given a numbered list of Wikipedia pages and a question. Each page is shown with its page ID, its title, and its main content. Read the pages carefully and answer the question using only information found in the provided pages; do not use any outside knowledge.

Work step by step: for each page, decide whether its content answers the question. If one of the pages contains the answer, reply in exactly this format:
PAGE_ID: <id of the page that contains the answer>
EVIDENCE: <the sentence or sentences from that page that answer the question>
ANSWER: <the short answer>

If none of the pages contains the answer, reply with the single line:
ANSWER: answer not found
You may add one line "RATIONALE: <brief reason why no page answers the question>" before the ANSWER line.)";

constexpr std::string_view kDefaultPage =
    "Page ID: {id}\nTitle: {title}\nContent: {content}";

constexpr std::string_view kDefaultQuestion = "Question: {question}";

// Renders an exemplar as a fully worked example in the canonical output
// grammar. The curated reasoning path of a positive exemplar becomes its
// EVIDENCE line.
std::string render_exemplar(const Exemplar& ex, const PromptTemplate& tmpl) {
  std::string out = "Example:\n";
  for (const Page* page : ex.pages) {
    out += render_page(*page, tmpl);
    out += "\n";
  }
  out += replace_all(tmpl.questionFormat, "{question}", ex.question);
  out += "\n";
  if (ex.kind == ExemplarKind::negative) {
    out += "ANSWER: ";
    out += kAbstainMarker;
    out += "\n";
    return out;
  }
  const std::string norm_answer = normalize_answer(ex.answer);
  const Page* source = ex.pages.empty() ? nullptr : ex.pages.front();
  for (const Page* page : ex.pages) {
    if (!norm_answer.empty() &&
        normalize_answer(page->title + " " + page->content)
                .find(norm_answer) != std::string::npos) {
      source = page;
      break;
    }
  }
  if (source != nullptr) {
    out += "PAGE_ID: " + source->id + "\n";
  }
  out += "EVIDENCE: " + ex.reasoning + "\n";
  out += "ANSWER: " + ex.answer + "\n";
  return out;
}

}  // namespace

const PromptTemplate& default_template() {
  static const PromptTemplate tmpl = [] {
    PromptTemplate t;
    t.systemInstruction = kDefaultSystem;
    t.pageFormat = kDefaultPage;
    t.questionFormat = kDefaultQuestion;
    validate_template(t, "built-in template");
    return t;
  }();
  return tmpl;
}

PromptTemplate load_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open template file " + path.string());
  }
  PromptTemplate tmpl;
  std::string* section = nullptr;
  std::string line;
  auto chomp = [](std::string& s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "[system]") {
      section = &tmpl.systemInstruction;
      continue;
    }
    if (line == "[page]") {
      section = &tmpl.pageFormat;
      continue;
    }
    if (line == "[question]") {
      section = &tmpl.questionFormat;
      continue;
    }
    if (section == nullptr) {
      if (line.empty()) continue;
      throw std::runtime_error(path.string() +
                               ": content before the first section marker");
    }
    *section += line;
    *section += '\n';
  }
  chomp(tmpl.systemInstruction);
  chomp(tmpl.pageFormat);
  chomp(tmpl.questionFormat);
  validate_template(tmpl, path.string());
  return tmpl;
}

std::string render_page(const Page& page, const PromptTemplate& tmpl) {
  std::string out = tmpl.pageFormat;
  out = replace_all(std::move(out), "{id}", page.id);
  out = replace_all(std::move(out), "{title}", page.title);
  out = replace_all(std::move(out), "{content}", page.content);
  return out;
}

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path,
                                     const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open exemplar pool " + path.string());
  }
  std::vector<Exemplar> pool;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      throw std::runtime_error(where + ": malformed JSON record");
    }
    Exemplar ex;
    ex.question = rec.at("question").get<std::string>();
    const std::string kind = rec.at("kind").get<std::string>();
    if (kind == "positive") {
      ex.kind = ExemplarKind::positive;
    } else if (kind == "negative") {
      ex.kind = ExemplarKind::negative;
    } else {
      throw std::runtime_error(where + ": unknown exemplar kind \"" + kind +
                               "\"");
    }
    ex.reasoning = rec.value("reasoning", "");
    ex.answer = rec.at("answer").get<std::string>();
    for (const auto& pid : rec.at("page_ids")) {
      ex.pages.push_back(&corpus.at(pid.get<std::string>()));
    }
    if (ex.kind == ExemplarKind::negative && ex.answer != kAbstainMarker) {
      throw std::runtime_error(where +
                               ": negative exemplar answer must be \"" +
                               std::string(kAbstainMarker) + "\"");
    }
    if (ex.kind == ExemplarKind::positive &&
        (ex.answer.empty() || ex.reasoning.empty())) {
      throw std::runtime_error(
          where + ": positive exemplar needs a non-empty answer and reasoning");
    }
    pool.push_back(std::move(ex));
  }
  return pool;
}

std::vector<Exemplar> build_shots(const std::vector<Exemplar>& pool, int n,
                                  uint64_t seed) {
  if (n < 0 || n % 2 != 0) {
    throw std::runtime_error("shot count must be even and non-negative, got " +
                             std::to_string(n));
  }
  std::vector<size_t> positives, negatives;
  for (size_t i = 0; i < pool.size(); ++i) {
    (pool[i].kind == ExemplarKind::positive ? positives : negatives)
        .push_back(i);
  }
  const size_t half = static_cast<size_t>(n) / 2;
  auto check = [&](const std::vector<size_t>& v, const char* kind) {
    if (v.size() < half) {
      throw std::runtime_error(
          std::string("exemplar pool has too few ") + kind + " examples: need " +
          std::to_string(half) + ", have " + std::to_string(v.size()) +
          " (short by " + std::to_string(half - v.size()) + ")");
    }
  };
  check(positives, "positive");
  check(negatives, "negative");

  SmallRng rng(hash_mix(seed, 0x73686f7473ULL));  // "shots"
  deterministic_shuffle(positives, rng);
  deterministic_shuffle(negatives, rng);

  std::vector<Exemplar> shots;
  shots.reserve(static_cast<size_t>(n));
  for (size_t i = 0; i < half; ++i) {
    shots.push_back(pool[positives[i]]);
    shots.push_back(pool[negatives[i]]);
  }
  return shots;
}

Prompt build_prompt(const PromptTemplate& tmpl,
                    const std::vector<Exemplar>& shots, const Window& window,
                    const std::string& question, const Vocab& vocab) {
  Prompt prompt;
  prompt.windowOrdinal = window.ordinal;
  prompt.shotCount = static_cast<int>(shots.size());

  std::ostringstream out;
  out << tmpl.systemInstruction << "\n";
  for (const Exemplar& shot : shots) {
    out << "\n" << render_exemplar(shot, tmpl);
  }
  out << "\n";
  for (const Page* page : window.pages) {
    out << render_page(*page, tmpl) << "\n";
  }
  out << "\n" << replace_all(tmpl.questionFormat, "{question}", question)
      << "\n";

  prompt.text = out.str();
  prompt.tokenCount = count_tokens(prompt.text, vocab);
  return prompt;
}

}  // namespace ragwin
