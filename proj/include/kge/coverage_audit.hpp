#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kge/kg_store.hpp"
#include "kge/language.hpp"

namespace kge {

enum class AuditField { Names, Descriptions };

std::string_view to_string(AuditField field);
AuditField audit_field_from(std::string_view s);

// How page views are pooled across languages for the eligibility floor.
enum class ViewsAgg { Max, Sum };

struct AuditOptions {
  std::int64_t views_floor = 100;
  ViewsAgg agg = ViewsAgg::Max;
  // Also emit cumulative torso rows (head ∪ torso) next to the disjoint
  // head / torso band / tail rows.
  bool include_cumulative = true;
  // When false the denominator is all eligible bucket entities instead of
  // those covered in the reference language.
  bool reference_denominator = true;
};

struct CoverageRow {
  LanguageTag lang;
  PopularityBucket bucket = PopularityBucket::Head;
  bool cumulative = false;
  AuditField field = AuditField::Names;
  std::int64_t covered = 0;
  std::int64_t total = 0;
  double fraction = 0.0;
};

struct CoverageTable {
  std::vector<CoverageRow> rows;
};

// Per-language coverage of `field` relative to `reference`, by popularity
// bucket. Eligibility pools views across languages per `opts.agg`; buckets
// rank the eligible set by reference-language views. Rows with an empty
// denominator are not emitted.
CoverageTable audit_coverage(const KgSnapshot& snapshot,
                             const std::vector<LanguageTag>& langs,
                             const LanguageTag& reference, AuditField field,
                             const AuditOptions& opts = {});

// CSV: lang,bucket,field,covered,total,fraction with fraction at 4 decimals.
void write_coverage_csv(const CoverageTable& table, std::ostream& out);

}  // namespace kge
