#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kge/errors.hpp"
#include "kge/language.hpp"

namespace kge {

// Gold data for one (entity, language): human-curated valid names and the
// names judged invalid. The two sets never overlap under normalization and
// the valid set is never empty.
struct BenchmarkEntry {
  std::string entity_id;
  LanguageTag lang;
  std::vector<std::string> valid_names;
  std::vector<std::string> invalid_names;
};

// Benchmark JSONL: {"id", "language", "valid", "invalid"} per line.
std::vector<BenchmarkEntry> load_benchmark(const std::filesystem::path& path);

struct MetricTriple {
  double ppv = 0.0;
  double tpr = 0.0;
  double f1 = 0.0;  // harmonic mean; 0 when ppv + tpr == 0
};

MetricTriple make_triple(double ppv, double tpr);

// Raised by the per-entity scorers when the relevant gold set is empty;
// such entities are excluded from aggregation and counted.
class EmptyGoldError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Hit counts under phi_name-equivalence after deduplicating both sides;
// the building block shared by the strict metrics and micro aggregation.
struct MatchCounts {
  std::size_t pred_hits = 0;
  std::size_t pred_total = 0;
  std::size_t gold_hits = 0;
  std::size_t gold_total = 0;
};

MatchCounts match_counts(const std::vector<std::string>& gold,
                         const std::vector<std::string>& predicted);

// PPV over predicted names, TPR over gold names, membership tested with
// phi_name. Empty predictions give ppv = 0; empty gold throws.
MetricTriple coverage_scores(const std::vector<std::string>& gold,
                             const std::vector<std::string>& predicted);

// Same arithmetic over the invalid-name sets: gold_invalid vs the names
// predicted to be incorrect.
MetricTriple precision_scores(const std::vector<std::string>& gold_invalid,
                              const std::vector<std::string>& flagged);

// At-least-one semantics: (hit, hit, hit) where hit is 1 when any predicted
// name phi-matches any gold name.
MetricTriple relaxed_scores(const std::vector<std::string>& gold,
                            const std::vector<std::string>& predicted);

enum class AggregationMode { Micro, Macro };

std::string_view to_string(AggregationMode mode);
AggregationMode aggregation_mode_from(std::string_view s);

struct PerEntityScore {
  std::string entity_id;
  MetricTriple triple;
  MatchCounts counts;
};

// Macro: unweighted mean of the per-entity triples. Micro: ppv/tpr
// recomputed from pooled hit counts, f1 from the pooled pair.
MetricTriple aggregate(const std::vector<PerEntityScore>& per_entity, AggregationMode mode);

struct LanguageReport {
  MetricTriple coverage;
  MetricTriple precision;
  MetricTriple relaxed_coverage;
  MetricTriple relaxed_precision;
  int n_entities = 0;            // benchmark entries for the language
  int coverage_evaluated = 0;    // entered the coverage aggregate
  int precision_evaluated = 0;   // entries with a non-empty invalid set
  int missing_predictions = 0;   // benchmark entries with no result row
  int unmatched_results = 0;     // result rows with no benchmark entry
};

struct EvaluationReport {
  std::map<LanguageTag, LanguageReport> per_language;
  AggregationMode mode = AggregationMode::Macro;
};

// Predictions for one (entity, language): the accepted values and the
// values flagged incorrect.
struct PredictionRow {
  std::string entity_id;
  LanguageTag lang;
  std::vector<std::string> accepted;
  std::vector<std::string> flagged;
};

EvaluationReport evaluate(const std::vector<BenchmarkEntry>& benchmark,
                          const std::vector<PredictionRow>& predictions,
                          AggregationMode mode);

void write_report_json(const EvaluationReport& report, std::ostream& out);

// Per-language F1 table with coverage and precision columns; `relaxed`
// selects which variant fills them.
void write_report_tsv(const EvaluationReport& report, std::ostream& out, bool relaxed);

}  // namespace kge
