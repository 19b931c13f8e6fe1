#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "kge/language.hpp"

namespace kge {

struct MarkerPair {
  std::string open = "[";
  std::string close = "]";
};

// A templated sentence with exactly one marked span. The span carries the
// entity name (name direction) or the description (description direction).
struct MarkedSentence {
  std::string text;
  LanguageTag lang;
  std::string entity_id;
};

enum class MarkDirection { Name, Description };

struct LanguageTemplates {
  std::string name_direction;         // e.g. "[{name}] is {description}."
  std::string description_direction;  // derived from name_direction when absent
  std::string fallback;               // e.g. "[{name}] is {class}."
};

// "a ", "an ", or "" for an English description; empty when the description
// already starts with an article or looks like an acronym.
std::string english_article_for(std::string_view description);

// Builds marked sentences for translation and recovers the marked span from
// translated output. Pure and safe for unrestricted concurrent use.
class Contextualizer {
 public:
  Contextualizer();  // built-in templates for the ten benchmark languages
  explicit Contextualizer(MarkerPair markers);

  // Template config JSON: {lang: {"name_direction": ..., "fallback": ...,
  // "description_direction"?: ...}} with {name}/{description}/{class}
  // placeholders. Languages absent from the file keep the English template.
  static Contextualizer from_config(const std::filesystem::path& path,
                                    MarkerPair markers = {});

  // Throws MarkerCollisionError when name or description contains an active
  // marker, ValidationError when either is empty after trimming.
  MarkedSentence naturalize(std::string_view name, std::string_view description,
                            const LanguageTag& lang,
                            MarkDirection direction = MarkDirection::Name,
                            std::string_view entity_id = "") const;

  // Context from an instance-of class label, for entities with no
  // description in the language.
  MarkedSentence naturalize_fallback(std::string_view name,
                                     std::string_view instance_of_label,
                                     const LanguageTag& lang,
                                     std::string_view entity_id = "") const;

  // Returns the trimmed text strictly between the single open marker and the
  // single close marker. Throws AlignmentError when markers are missing,
  // duplicated, reversed, or enclose only whitespace.
  std::string extract_marked_span(std::string_view translated) const;

  const MarkerPair& markers() const { return markers_; }

 private:
  const LanguageTemplates& templates_for(const LanguageTag& lang) const;
  MarkedSentence render(const LanguageTemplates& templates, MarkDirection direction,
                        std::string_view name, std::string_view context,
                        bool context_is_class, const LanguageTag& lang,
                        std::string_view entity_id) const;

  MarkerPair markers_;
  std::map<std::string, LanguageTemplates> templates_;
};

}  // namespace kge
