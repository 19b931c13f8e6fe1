#include "kge/ensemble.hpp"

#include <algorithm>
#include <map>

#include "kge/errors.hpp"
#include "kge/unicode.hpp"

namespace kge {

namespace {

struct Retained {
  const CandidateAnswer* candidate;
  std::string canonical;
  std::set<SourceId> supporters;
};

// Support between two retained candidates under the configured phi.
// Provider failures count as non-support.
bool supports(const Retained& a, const Retained& b, const MatcherConfig& matcher,
              SourceCounters* counters) {
  if (matcher.mode == MatchMode::Name) {
    // phi_name is equality of non-empty normalized forms, which the
    // canonical keys already encode.
    return a.canonical[0] != '\x01' && a.canonical == b.canonical;
  }
  try {
    return phi(a.candidate->value, b.candidate->value, matcher);
  } catch (const MatcherError&) {
    if (counters) ++counters->source_errors;
    return false;
  }
}

}  // namespace

std::vector<ScoredAnswer> score_candidates(const std::vector<CandidateAnswer>& candidates,
                                           const MatcherConfig& matcher,
                                           SourceCounters* counters) {
  // One vote per source per answer class: a source repeating itself (e.g. a
  // verbose top-5 list with near-duplicates) cannot inflate agreement.
  std::vector<Retained> retained;
  retained.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    std::string value = uni::trim(candidate.value);
    if (value.empty()) continue;
    std::string canonical = canonical_key(candidate.value);
    bool duplicate = false;
    for (const auto& earlier : retained) {
      if (earlier.candidate->source != candidate.source) continue;
      if (matcher.mode == MatchMode::Name) {
        duplicate = canonical[0] != '\x01' && canonical == earlier.canonical;
      } else {
        try {
          duplicate = phi(candidate.value, earlier.candidate->value, matcher);
        } catch (const MatcherError&) {
          if (counters) ++counters->source_errors;
          duplicate = false;
        }
      }
      if (duplicate) break;
    }
    if (duplicate) continue;
    retained.push_back(Retained{&candidate, std::move(canonical), {}});
  }

  // sigma(y): distinct other sources with at least one supporting answer.
  if (matcher.mode == MatchMode::Name) {
    std::map<std::string, std::set<SourceId>> sources_by_class;
    for (const auto& r : retained) {
      if (r.canonical[0] != '\x01') sources_by_class[r.canonical].insert(r.candidate->source);
    }
    for (auto& r : retained) {
      if (r.canonical[0] == '\x01') continue;
      auto it = sources_by_class.find(r.canonical);
      if (it == sources_by_class.end()) continue;
      r.supporters = it->second;
      r.supporters.erase(r.candidate->source);
    }
  } else {
    for (std::size_t i = 0; i < retained.size(); ++i) {
      for (std::size_t j = 0; j < retained.size(); ++j) {
        if (i == j) continue;
        if (retained[i].candidate->source == retained[j].candidate->source) continue;
        if (supports(retained[i], retained[j], matcher, counters)) {
          retained[i].supporters.insert(retained[j].candidate->source);
        }
      }
    }
  }

  // Merge equivalent answers into one ScoredAnswer per class.
  std::map<std::string, std::vector<const Retained*>> classes;
  for (const auto& r : retained) classes[r.canonical].push_back(&r);

  std::vector<ScoredAnswer> out;
  out.reserve(classes.size());
  for (auto& [canonical, members] : classes) {
    // Deterministic member order regardless of input order.
    std::sort(members.begin(), members.end(), [](const Retained* a, const Retained* b) {
      if (a->candidate->value != b->candidate->value)
        return a->candidate->value < b->candidate->value;
      return a->candidate->source < b->candidate->source;
    });

    // Surface form: most frequent raw form; ties shortest, then lexicographic.
    std::map<std::string, int> form_freq;
    for (const Retained* m : members) ++form_freq[m->candidate->value];
    std::string surface;
    int best_freq = 0;
    for (const auto& [form, freq] : form_freq) {
      if (freq > best_freq ||
          (freq == best_freq &&
           (form.size() < surface.size() ||
            (form.size() == surface.size() && form < surface)))) {
        surface = form;
        best_freq = freq;
      }
    }

    const Retained* origin_member = nullptr;
    for (const Retained* m : members) {
      if (m->candidate->value == surface) {
        origin_member = m;
        break;
      }
    }

    // Score is the maximum sigma among members; the supporter set comes from
    // a member achieving it, preferring the origin member (always an argmax
    // under a symmetric, transitive phi).
    const Retained* best = origin_member;
    for (const Retained* m : members) {
      if (m->supporters.size() > best->supporters.size()) best = m;
    }

    ScoredAnswer answer;
    answer.value = surface;
    answer.canonical = canonical;
    answer.score = static_cast<int>(best->supporters.size());
    answer.supporters = best->supporters;
    answer.origin = origin_member->candidate->source;
    out.push_back(std::move(answer));
  }

  std::sort(out.begin(), out.end(), [](const ScoredAnswer& a, const ScoredAnswer& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.canonical < b.canonical;
  });
  return out;
}

std::vector<ScoredAnswer> select(const std::vector<ScoredAnswer>& scored, int lambda) {
  std::vector<ScoredAnswer> out;
  for (const auto& answer : scored) {
    if (answer.score >= lambda) out.push_back(answer);
  }
  return out;
}

std::vector<std::string> flag_incorrect(const std::vector<std::string>& existing,
                                        const std::vector<ScoredAnswer>& accepted,
                                        const MatcherConfig& matcher) {
  std::vector<std::string> values;
  values.reserve(accepted.size());
  for (const auto& answer : accepted) values.push_back(answer.value);
  return flag_incorrect(existing, values, matcher);
}

std::vector<std::string> flag_incorrect(const std::vector<std::string>& existing,
                                        const std::vector<std::string>& accepted_values,
                                        const MatcherConfig& matcher) {
  std::vector<std::string> flagged;
  for (const auto& value : existing) {
    bool supported = false;
    for (const auto& accepted : accepted_values) {
      try {
        if (phi(value, accepted, matcher)) {
          supported = true;
          break;
        }
      } catch (const MatcherError&) {
        // non-supporting
      }
    }
    if (!supported) flagged.push_back(value);
  }
  return flagged;
}

bool has_usable_source_language(const EntityRecord& entity, const LanguageTag& target) {
  for (const auto& [lang, names] : entity.names) {
    if (lang == target || names.empty()) continue;
    if (entity.description_in(lang) || entity.instance_of_in(lang)) return true;
  }
  return false;
}

EnhancementResult enhance_entity(const EntityRecord& entity, const LanguageTag& target,
                                 std::span<CandidateSource* const> sources,
                                 const EnsembleConfig& config) {
  EnhancementResult result;
  result.entity_id = entity.id;
  result.target_lang = target;

  if (!has_usable_source_language(entity, target)) {
    result.skipped = true;
    return result;
  }

  SourceCounters counters;
  std::vector<CandidateAnswer> candidates;
  for (CandidateSource* source : sources) {
    auto answers = source->generate(entity, target, counters);
    candidates.insert(candidates.end(), std::make_move_iterator(answers.begin()),
                      std::make_move_iterator(answers.end()));
  }

  auto scored = score_candidates(candidates, config.matcher, &counters);
  result.accepted = select(scored, config.lambda_coverage);

  // The existing values under scrutiny: names, or the stored description
  // when the matcher runs in description mode.
  std::vector<std::string> existing;
  if (config.matcher.mode == MatchMode::Name) {
    if (const auto* names = entity.names_in(target)) existing = *names;
  } else if (const std::string* desc = entity.description_in(target)) {
    existing.push_back(*desc);
  }
  if (!existing.empty()) {
    auto precision_set = select(scored, config.lambda_precision);
    result.flagged_incorrect = flag_incorrect(existing, precision_set, config.matcher);
  }

  result.alignment_failures = counters.alignment_failures;
  result.source_errors = counters.source_errors;
  return result;
}

}  // namespace kge
