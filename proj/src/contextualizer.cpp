#include "kge/contextualizer.hpp"

#include <cctype>
#include <fstream>

#include <json.hpp>

#include "kge/errors.hpp"
#include "kge/unicode.hpp"

namespace kge {

using nlohmann::json;

namespace {

// Canonical templates use literal [ ] around the marked placeholder; the
// active marker pair is substituted at render time.
const std::map<std::string, LanguageTemplates>& builtin_templates() {
  static const std::map<std::string, LanguageTemplates> templates = {
      {"en", {"[{name}] is {description}.", "", "[{name}] is {class}."}},
      {"de", {"[{name}] ist {description}.", "", "[{name}] ist {class}."}},
      {"es", {"[{name}] es {description}.", "", "[{name}] es {class}."}},
      {"fr", {"[{name}] est {description}.", "", "[{name}] est {class}."}},
      {"it", {"[{name}] è {description}.", "", "[{name}] è {class}."}},
      {"ja", {"[{name}]は{description}です。", "", "[{name}]は{class}です。"}},
      {"ko", {"[{name}]은 {description}입니다.", "", "[{name}]은 {class}입니다."}},
      {"ru", {"[{name}] — это {description}.", "", "[{name}] — это {class}."}},
      {"zh", {"[{name}]是{description}。", "", "[{name}]是{class}。"}},
      {"ar", {"[{name}] هو {description}.", "", "[{name}] هو {class}."}},
  };
  return templates;
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

void replace_first(std::string& text, std::string_view needle, std::string_view value) {
  std::size_t pos = text.find(needle);
  if (pos != std::string::npos) text.replace(pos, needle.size(), value);
}

bool is_ascii_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
    case 'A': case 'E': case 'I': case 'O': case 'U':
      return true;
    default:
      return false;
  }
}

// True when the template already supplies an article right before `pos`.
bool has_article_before(std::string_view text, std::size_t pos) {
  std::size_t end = pos;
  while (end > 0 && text[end - 1] == ' ') --end;
  auto ends_with_word = [&](std::string_view word) {
    if (end < word.size()) return false;
    if (text.substr(end - word.size(), word.size()) != word) return false;
    if (end == word.size()) return true;
    char before = text[end - word.size() - 1];
    return before == ' ' || before == '[';
  };
  return ends_with_word("a") || ends_with_word("an") || ends_with_word("the") ||
         ends_with_word("A") || ends_with_word("An") || ends_with_word("The");
}

}  // namespace

std::string english_article_for(std::string_view description) {
  std::size_t token_end = description.find_first_of(" \t");
  std::string_view first = description.substr(0, token_end);
  if (first.empty()) return "";

  std::string lowered;
  for (char c : first) lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lowered == "a" || lowered == "an" || lowered == "the") return "";

  // Acronyms and other fully-uppercase tokens read as proper names.
  bool has_lower = false;
  bool has_alpha = false;
  for (char c : first) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc)) {
      has_alpha = true;
      if (std::islower(uc)) has_lower = true;
    }
  }
  if (has_alpha && !has_lower && first.size() >= 2) return "";

  return is_ascii_vowel(description.front()) ? "an " : "a ";
}

Contextualizer::Contextualizer() : Contextualizer(MarkerPair{}) {}

Contextualizer::Contextualizer(MarkerPair markers)
    : markers_(std::move(markers)), templates_(builtin_templates()) {
  if (markers_.open.empty() || markers_.close.empty() || markers_.open == markers_.close) {
    throw ValidationError("marker pair must be two distinct non-empty strings");
  }
}

Contextualizer Contextualizer::from_config(const std::filesystem::path& path,
                                           MarkerPair markers) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open template config: " + path.string());
  json config;
  try {
    config = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("template config: " + std::string(e.what()));
  }
  if (!config.is_object()) throw ParseError("template config must be a JSON object");

  Contextualizer ctx(std::move(markers));
  for (const auto& [code, entry] : config.items()) {
    LanguageTag lang(code);  // validates
    LanguageTemplates templates;
    if (entry.contains("name_direction")) {
      templates.name_direction = entry.at("name_direction").get<std::string>();
    }
    if (entry.contains("description_direction")) {
      templates.description_direction = entry.at("description_direction").get<std::string>();
    }
    if (entry.contains("fallback")) {
      templates.fallback = entry.at("fallback").get<std::string>();
    }
    if (templates.name_direction.empty()) {
      throw ParseError("template config for " + code + " lacks \"name_direction\"");
    }
    if (templates.fallback.empty()) {
      throw ParseError("template config for " + code + " lacks \"fallback\"");
    }
    ctx.templates_[lang.code()] = std::move(templates);
  }
  return ctx;
}

const LanguageTemplates& Contextualizer::templates_for(const LanguageTag& lang) const {
  auto it = templates_.find(lang.code());
  if (it != templates_.end()) return it->second;
  // Engines tolerate English context sentences; the marker contract is what
  // matters.
  return templates_.at("en");
}

MarkedSentence Contextualizer::render(const LanguageTemplates& templates,
                                      MarkDirection direction, std::string_view name,
                                      std::string_view context, bool context_is_class,
                                      const LanguageTag& lang,
                                      std::string_view entity_id) const {
  std::string trimmed_name = uni::trim(name);
  std::string trimmed_context = uni::trim(context);
  if (trimmed_name.empty()) throw ValidationError("name must not be empty");
  if (trimmed_context.empty()) {
    throw ValidationError(context_is_class ? "instance-of label must not be empty"
                                           : "description must not be empty");
  }
  for (const auto& piece : {trimmed_name, trimmed_context}) {
    if (piece.find(markers_.open) != std::string::npos ||
        piece.find(markers_.close) != std::string::npos) {
      throw MarkerCollisionError("text contains an active marker: \"" + piece + "\"");
    }
  }

  const std::string& context_slot = context_is_class ? "{class}" : "{description}";
  std::string text;
  if (context_is_class) {
    text = templates.fallback;
  } else if (direction == MarkDirection::Name) {
    text = templates.name_direction;
  } else if (!templates.description_direction.empty()) {
    text = templates.description_direction;
  } else {
    // Derive the description-direction template by moving the markers.
    text = templates.name_direction;
    replace_first(text, "[{name}]", "{name}");
    replace_first(text, "{description}", "[{description}]");
  }

  // English grammar (and hence the article heuristic) applies whenever the
  // English template is in play, including the unknown-language fallback.
  const bool english_template =
      lang.code() == "en" || templates_.find(lang.code()) == templates_.end();
  if (english_template) {
    std::size_t slot = text.find(context_slot);
    std::size_t article_anchor = slot;
    if (slot != std::string::npos && slot > 0 && text.compare(slot - 1, 1, "[") == 0) {
      article_anchor = slot - 1;  // article goes outside the marker
    }
    if (slot != std::string::npos && !has_article_before(text, article_anchor)) {
      std::string article = english_article_for(trimmed_context);
      if (!article.empty()) {
        text.insert(article_anchor, article);
      }
    }
  }

  // The active marker pair replaces the template's canonical brackets before
  // values go in, so bracket characters inside values stay literal.
  if (markers_.open != "[" || markers_.close != "]") {
    std::string swapped;
    swapped.reserve(text.size());
    for (char c : text) {
      if (c == '[') {
        swapped += markers_.open;
      } else if (c == ']') {
        swapped += markers_.close;
      } else {
        swapped += c;
      }
    }
    text = std::move(swapped);
  }

  // Both slots are located before either value goes in, so placeholder-like
  // text inside a value stays literal.
  const std::size_t name_pos = text.find("{name}");
  const std::size_t ctx_pos = text.find(context_slot);
  if (name_pos == std::string::npos || ctx_pos == std::string::npos) {
    throw ValidationError("template lacks a required placeholder: " + text);
  }
  if (name_pos > ctx_pos) {
    text.replace(name_pos, 6, trimmed_name);
    text.replace(ctx_pos, context_slot.size(), trimmed_context);
  } else {
    text.replace(ctx_pos, context_slot.size(), trimmed_context);
    text.replace(name_pos, 6, trimmed_name);
  }

  // The rendered sentence must satisfy every MarkedSentence invariant:
  // exactly one marker pair, in order, around a non-empty span.
  try {
    (void)extract_marked_span(text);
  } catch (const AlignmentError& e) {
    throw ValidationError("template produced an invalid marked sentence (" +
                          std::string(e.what()) + "): " + text);
  }
  MarkedSentence sentence;
  sentence.text = std::move(text);
  sentence.lang = lang;
  sentence.entity_id = std::string(entity_id);
  return sentence;
}

MarkedSentence Contextualizer::naturalize(std::string_view name, std::string_view description,
                                          const LanguageTag& lang, MarkDirection direction,
                                          std::string_view entity_id) const {
  return render(templates_for(lang), direction, name, description, false, lang, entity_id);
}

MarkedSentence Contextualizer::naturalize_fallback(std::string_view name,
                                                   std::string_view instance_of_label,
                                                   const LanguageTag& lang,
                                                   std::string_view entity_id) const {
  return render(templates_for(lang), MarkDirection::Name, name, instance_of_label, true,
                lang, entity_id);
}

std::string Contextualizer::extract_marked_span(std::string_view translated) const {
  const std::size_t opens = count_occurrences(translated, markers_.open);
  const std::size_t closes = count_occurrences(translated, markers_.close);
  if (opens == 0 && closes == 0) throw AlignmentError("markers lost in translation");
  if (opens != 1 || closes != 1) throw AlignmentError("expected exactly one marker pair");

  const std::size_t open_pos = translated.find(markers_.open);
  const std::size_t close_pos = translated.find(markers_.close);
  if (close_pos < open_pos) throw AlignmentError("close marker precedes open marker");

  std::string_view span = translated.substr(open_pos + markers_.open.size(),
                                            close_pos - open_pos - markers_.open.size());
  std::string trimmed = uni::trim(span);
  if (trimmed.empty()) throw AlignmentError("marked span is empty");
  return trimmed;
}

}  // namespace kge
