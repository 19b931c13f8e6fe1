#include "kge/unicode.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace kge::uni {

char32_t next_codepoint(std::string_view s, std::size_t& i) {
  UChar32 cp = 0;
  int32_t offset = static_cast<int32_t>(i);
  const int32_t length = static_cast<int32_t>(s.size());
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), offset, length, cp);
  i = static_cast<std::size_t>(offset);
  if (cp < 0) return 0xFFFD;
  return static_cast<char32_t>(cp);
}

void append_utf8(std::string& out, char32_t cp) {
  uint8_t buf[4];
  int32_t offset = 0;
  UBool error = false;
  U8_APPEND(buf, offset, 4, static_cast<UChar32>(cp), error);
  if (error) {
    out += "\xEF\xBF\xBD";  // U+FFFD
    return;
  }
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(offset));
}

std::size_t codepoint_count(std::string_view s) {
  std::size_t i = 0;
  std::size_t n = 0;
  while (i < s.size()) {
    next_codepoint(s, i);
    ++n;
  }
  return n;
}

bool is_punctuation(char32_t cp) {
  switch (u_charType(static_cast<UChar32>(cp))) {
    case U_CONNECTOR_PUNCTUATION:
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
      return true;
    default:
      return false;
  }
}

bool is_whitespace(char32_t cp) {
  return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0;
}

char32_t to_lower(char32_t cp) {
  return static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp)));
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x3040 && cp <= 0x30FF) ||    // Hiragana, Katakana
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // CJK ext A
         (cp >= 0x4E00 && cp <= 0x9FFF) ||    // CJK unified
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // CJK compatibility
         (cp >= 0x1100 && cp <= 0x11FF) ||    // Hangul jamo
         (cp >= 0xAC00 && cp <= 0xD7AF) ||    // Hangul syllables
         (cp >= 0x20000 && cp <= 0x2A6DF);    // CJK ext B
}

std::string trim(std::string_view s) {
  std::size_t begin = 0;
  while (begin < s.size()) {
    std::size_t probe = begin;
    if (!is_whitespace(next_codepoint(s, probe))) break;
    begin = probe;
  }
  std::size_t i = begin;
  std::size_t end = begin;
  while (i < s.size()) {
    char32_t cp = next_codepoint(s, i);
    if (!is_whitespace(cp)) end = i;
  }
  return std::string(s.substr(begin, end - begin));
}

}  // namespace kge::uni
