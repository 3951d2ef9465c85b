#pragma once

#include <string>
#include <string_view>

namespace ragwin {

// Standard open-domain QA answer normalization: casefold, drop the articles
// "a" / "an" / "the" as whole words, remove punctuation characters, collapse
// whitespace runs, trim. Exact-match scores are sensitive to this choice;
// it is applied to both predictions and gold aliases everywhere.
std::string normalize_answer(std::string_view text);

}  // namespace ragwin
