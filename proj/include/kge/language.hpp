#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace kge {

// Lowercase BCP-47-style primary subtag, e.g. "en" or "zh".
class LanguageTag {
 public:
  LanguageTag() = default;  // empty tag; only valid as a placeholder
  explicit LanguageTag(std::string_view code);  // throws ValidationError

  const std::string& code() const { return code_; }
  bool empty() const { return code_.empty(); }

  // English display name ("it" -> "Italian"); falls back to the code itself.
  std::string english_name() const;
  // Uppercase form used in prompt rendering ("it" -> "IT").
  std::string upper() const;

  auto operator<=>(const LanguageTag&) const = default;

 private:
  std::string code_;
};

// Parses a comma-separated list like "de,es,fr".
std::vector<LanguageTag> parse_language_list(std::string_view csv);

}  // namespace kge
