#include "kge/language.hpp"

#include <array>
#include <cctype>

#include "kge/errors.hpp"

namespace kge {

namespace {

struct LanguageName {
  std::string_view code;
  std::string_view name;
};

// English names for the benchmark languages; anything else falls back to
// the raw code.
constexpr std::array<LanguageName, 10> kLanguageNames{{
    {"ar", "Arabic"},
    {"de", "German"},
    {"en", "English"},
    {"es", "Spanish"},
    {"fr", "French"},
    {"it", "Italian"},
    {"ja", "Japanese"},
    {"ko", "Korean"},
    {"ru", "Russian"},
    {"zh", "Chinese"},
}};

}  // namespace

LanguageTag::LanguageTag(std::string_view code) : code_(code) {
  if (code_.empty()) {
    throw ValidationError("language tag must not be empty");
  }
  for (char c : code_) {
    if (c < 'a' || c > 'z') {
      throw ValidationError("language tag must be lowercase ASCII letters: \"" +
                            code_ + "\"");
    }
  }
}

std::string LanguageTag::english_name() const {
  for (const auto& entry : kLanguageNames) {
    if (entry.code == code_) return std::string(entry.name);
  }
  return code_;
}

std::string LanguageTag::upper() const {
  std::string out = code_;
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<LanguageTag> parse_language_list(std::string_view csv) {
  std::vector<LanguageTag> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string_view item =
        csv.substr(pos, comma == std::string_view::npos ? csv.size() - pos : comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace kge
