#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace evanno {

// Text folding shared by tokenization, keyword matching, and the answer
// equivalence metrics. Input is UTF-8; invalid bytes pass through unchanged.
//
// Folding lowercases (ASCII, Latin-1, Greek and Cyrillic capitals), deletes
// punctuation code points (all ASCII punctuation/symbols plus the common
// Unicode punctuation blocks) and collapses whitespace runs to one space.
std::string fold_text(std::string_view text);

// Whitespace-split tokens of fold_text(text). No stemming.
std::vector<std::string> tokenize(std::string_view text);

// fold_text with the English articles "a", "an" and "the" removed.
std::string normalize_answer(std::string_view text);
std::vector<std::string> answer_tokens(std::string_view text);

// Trims and collapses every ASCII whitespace run (including newlines) to one
// space. Case and punctuation are kept.
std::string collapse_whitespace(std::string_view text);

// ASCII whitespace trim.
std::string_view trim(std::string_view text);

bool iequals_ascii(std::string_view a, std::string_view b);
std::string to_lower_ascii(std::string_view text);

}  // namespace evanno
