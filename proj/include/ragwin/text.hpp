#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Codepoint-level text helpers shared by the tokenizer and answer
// normalization. Unicode coverage is deliberately limited to Latin script
// (ASCII, Latin-1 Supplement, Latin Extended-A); CJK and other scripts pass
// through unchanged.
namespace ragwin {

// Decodes UTF-8 into codepoints. Invalid byte sequences decode to U+FFFD,
// one replacement per offending byte.
std::u32string decode_utf8(std::string_view text);

void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view cps);

bool is_space_cp(char32_t cp);
bool is_control_cp(char32_t cp);
bool is_punct_cp(char32_t cp);

// Latin lowercase mapping; non-Latin codepoints are returned unchanged.
char32_t to_lower_cp(char32_t cp);

// For a lowercased codepoint, returns the accent-free base letter where the
// character canonically decomposes into base + combining marks (e.g. é -> e).
// Characters without such a decomposition (ø, æ, ł, ...) are returned as-is.
// Combining marks themselves map to 0, meaning "drop".
char32_t strip_accent_cp(char32_t cp);

// Lowercases (Latin ranges) without accent stripping.
std::string fold_case(std::string_view text);

// fold_case + trim of leading/trailing ASCII/Unicode whitespace.
std::string fold_case_trim(std::string_view text);

}  // namespace ragwin
