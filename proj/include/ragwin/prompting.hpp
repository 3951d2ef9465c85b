#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ragwin/corpus.hpp"
#include "ragwin/windowing.hpp"
#include "ragwin/wordpiece.hpp"

// Renders windows into prompts: system instruction, optional few-shot
// exemplars, page renderings, and the question.
namespace ragwin {

struct PromptTemplate {
  // must contain the abstention phrase exactly as the parser expects
  std::string systemInstruction;
  // placeholders: {id}, {title}, {content}
  std::string pageFormat;
  // placeholder: {question}
  std::string questionFormat;
};

// The template compiled into the binary; identical to
// data/templates/default_prompt.txt.
const PromptTemplate& default_template();

// Template file layout: plain text with [system] / [page] / [question]
// section markers, each on its own line. Validates that the system section
// carries the abstention phrase and that page/question sections have their
// placeholders.
PromptTemplate load_template(const std::filesystem::path& path);

std::string render_page(const Page& page, const PromptTemplate& tmpl);

enum class ExemplarKind { positive, negative };

struct Exemplar {
  std::string question;
  std::vector<const Page*> pages;
  ExemplarKind kind = ExemplarKind::positive;
  std::string reasoning;  // curated reasoning path; empty for negative
  std::string answer;     // the abstention phrase for negative exemplars
};

// Pool file: line-delimited JSON records {question, page_ids, kind,
// reasoning, answer}; page ids resolved against the corpus. Returned
// pointers stay valid while the corpus is alive.
std::vector<Exemplar> load_exemplars(const std::filesystem::path& path,
                                     const Corpus& corpus);

// Exactly n/2 positive and n/2 negative exemplars, interleaved starting
// with a positive one; selection is deterministic given the seed. Throws
// when n is odd or either kind falls short, naming the kind and shortfall.
std::vector<Exemplar> build_shots(const std::vector<Exemplar>& pool, int n,
                                  uint64_t seed);

struct Prompt {
  std::string text;
  long tokenCount = 0;  // wordpiece tokens, == count_tokens(text)
  int windowOrdinal = 0;
  int shotCount = 0;
};

// Layout: system instruction, worked-example shots, rendered pages in
// window order, question.
Prompt build_prompt(const PromptTemplate& tmpl,
                    const std::vector<Exemplar>& shots, const Window& window,
                    const std::string& question, const Vocab& vocab);

}  // namespace ragwin
