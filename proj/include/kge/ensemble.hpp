#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "kge/kg_store.hpp"
#include "kge/matchers.hpp"
#include "kge/source_systems.hpp"

namespace kge {

// A candidate after agreement scoring. `score` is the number of distinct
// other sources that produced a supporting answer; `supporters` is that set
// and never contains `origin`'s own source.
struct ScoredAnswer {
  std::string value;
  std::string canonical;
  int score = 0;
  std::set<SourceId> supporters;
  SourceId origin;
};

struct EnsembleConfig {
  int lambda_coverage = 2;   // acceptance threshold for new values
  int lambda_precision = 1;  // threshold backing incorrect-value flagging
  MatcherConfig matcher;
};

struct EnhancementResult {
  std::string entity_id;
  LanguageTag target_lang;
  std::vector<ScoredAnswer> accepted;           // sorted score desc, canonical asc
  std::vector<std::string> flagged_incorrect;   // existing values judged unsupported
  bool skipped = false;
  int alignment_failures = 0;
  int source_errors = 0;
};

// Scores every candidate by cross-source agreement: candidates are first
// deduplicated per source (one vote per source per answer class), each
// retained answer y gets score = number of distinct OTHER sources with a
// supporting answer y', and equivalent answers merge into one ScoredAnswer
// whose surface form is the most frequent raw form (ties: shortest, then
// lexicographic). Output is sorted by score descending, canonical ascending.
std::vector<ScoredAnswer> score_candidates(const std::vector<CandidateAnswer>& candidates,
                                           const MatcherConfig& matcher,
                                           SourceCounters* counters = nullptr);

// Keeps answers with score >= lambda, preserving rank order.
std::vector<ScoredAnswer> select(const std::vector<ScoredAnswer>& scored, int lambda);

// Existing KG values with no supporting accepted answer.
std::vector<std::string> flag_incorrect(const std::vector<std::string>& existing,
                                        const std::vector<ScoredAnswer>& accepted,
                                        const MatcherConfig& matcher);
std::vector<std::string> flag_incorrect(const std::vector<std::string>& existing,
                                        const std::vector<std::string>& accepted_values,
                                        const MatcherConfig& matcher);

// Runs the full pipeline for one entity: queries every source, scores the
// pooled candidates, selects with lambda_coverage, and flags existing
// target-language values against the lambda_precision selection. Entities
// with no usable (name + context) source language are marked skipped.
EnhancementResult enhance_entity(const EntityRecord& entity, const LanguageTag& target,
                                 std::span<CandidateSource* const> sources,
                                 const EnsembleConfig& config);

// True when some language other than `target` has both a name and context
// (description or instance-of label) for the entity.
bool has_usable_source_language(const EntityRecord& entity, const LanguageTag& target);

}  // namespace kge
