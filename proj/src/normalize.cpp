#include "ragwin/normalize.hpp"

#include <vector>

#include "ragwin/text.hpp"

namespace ragwin {

std::string normalize_answer(std::string_view text) {
  std::u32string cps = decode_utf8(text);
  for (auto& cp : cps) cp = to_lower_cp(cp);

  // split on whitespace, drop articles
  std::vector<std::u32string> words;
  std::u32string current;
  for (char32_t cp : cps) {
    if (is_space_cp(cp) || is_control_cp(cp)) {
      if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));

  std::string out;
  bool first = true;
  for (const auto& word : words) {
    if (word == U"a" || word == U"an" || word == U"the") continue;
    std::u32string kept;
    for (char32_t cp : word) {
      if (!is_punct_cp(cp)) kept.push_back(cp);
    }
    if (kept.empty()) continue;
    if (!first) out.push_back(' ');
    out += encode_utf8(kept);
    first = false;
  }
  return out;
}

}  // namespace ragwin
