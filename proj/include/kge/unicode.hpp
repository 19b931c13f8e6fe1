#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace kge::uni {

// Decodes the codepoint starting at byte offset `i` and advances `i` past it.
// Invalid sequences decode to U+FFFD and advance by one byte.
char32_t next_codepoint(std::string_view s, std::size_t& i);

void append_utf8(std::string& out, char32_t cp);

std::size_t codepoint_count(std::string_view s);

bool is_punctuation(char32_t cp);  // Unicode general categories P*
bool is_whitespace(char32_t cp);
char32_t to_lower(char32_t cp);  // simple one-to-one lowercase mapping

// Han, Hiragana, Katakana, and Hangul ranges; these script runs are
// tokenized one codepoint at a time.
bool is_cjk(char32_t cp);

std::string trim(std::string_view s);  // strips Unicode whitespace at both ends

}  // namespace kge::uni
