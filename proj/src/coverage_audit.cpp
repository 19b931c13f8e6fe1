#include "kge/coverage_audit.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "kge/errors.hpp"

namespace kge {

std::string_view to_string(AuditField field) {
  return field == AuditField::Names ? "names" : "descriptions";
}

AuditField audit_field_from(std::string_view s) {
  if (s == "names") return AuditField::Names;
  if (s == "descriptions") return AuditField::Descriptions;
  throw ParseError("unknown audit field: \"" + std::string(s) + "\"");
}

namespace {

bool field_present(const EntityRecord& record, AuditField field, const LanguageTag& lang) {
  if (field == AuditField::Names) return record.names_in(lang) != nullptr;
  return record.description_in(lang) != nullptr;
}

std::int64_t pooled_views(const EntityRecord& record, ViewsAgg agg) {
  std::int64_t pooled = 0;
  for (const auto& [lang, views] : record.page_views) {
    if (agg == ViewsAgg::Max) {
      pooled = std::max(pooled, views);
    } else {
      pooled += views;
    }
  }
  return pooled;
}

}  // namespace

CoverageTable audit_coverage(const KgSnapshot& snapshot,
                             const std::vector<LanguageTag>& langs,
                             const LanguageTag& reference, AuditField field,
                             const AuditOptions& opts) {
  // Eligibility pools views across languages; ranking within the eligible
  // set uses reference-language views (0 when absent) so the buckets
  // partition every eligible entity.
  std::vector<std::pair<std::int64_t, const EntityRecord*>> eligible;
  for (const auto& [id, record] : snapshot.entities()) {
    if (pooled_views(record, opts.agg) >= opts.views_floor) {
      eligible.emplace_back(record.views_in(reference), &record);
    }
  }
  std::sort(eligible.begin(), eligible.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->id < b.second->id;
  });

  const std::size_t n = eligible.size();
  const std::size_t head = head_count(n);
  const std::size_t torso = torso_cumulative_count(n);

  struct Tally {
    std::int64_t covered = 0;
    std::int64_t total = 0;
  };
  constexpr int kBuckets = 3;

  CoverageTable table;
  std::vector<LanguageTag> all_langs = langs;
  if (std::find(all_langs.begin(), all_langs.end(), reference) == all_langs.end()) {
    all_langs.insert(all_langs.begin(), reference);
  }

  for (const auto& lang : all_langs) {
    Tally tallies[kBuckets];
    for (std::size_t rank = 0; rank < n; ++rank) {
      const EntityRecord& record = *eligible[rank].second;
      const int bucket = rank < head ? 0 : rank < torso ? 1 : 2;
      if (opts.reference_denominator && !field_present(record, field, reference)) continue;
      ++tallies[bucket].total;
      if (field_present(record, field, lang)) ++tallies[bucket].covered;
    }

    auto emit = [&](PopularityBucket bucket, bool cumulative, const Tally& tally) {
      if (tally.total == 0) return;
      CoverageRow row;
      row.lang = lang;
      row.bucket = bucket;
      row.cumulative = cumulative;
      row.field = field;
      row.covered = tally.covered;
      row.total = tally.total;
      row.fraction = static_cast<double>(tally.covered) / static_cast<double>(tally.total);
      table.rows.push_back(std::move(row));
    };

    emit(PopularityBucket::Head, false, tallies[0]);
    emit(PopularityBucket::Torso, false, tallies[1]);
    emit(PopularityBucket::Tail, false, tallies[2]);
    if (opts.include_cumulative) {
      Tally torso_cum{tallies[0].covered + tallies[1].covered,
                      tallies[0].total + tallies[1].total};
      emit(PopularityBucket::Torso, true, torso_cum);
    }
  }
  return table;
}

void write_coverage_csv(const CoverageTable& table, std::ostream& out) {
  out << "lang,bucket,field,covered,total,fraction\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& row : table.rows) {
    out << row.lang.code() << ',' << to_string(row.bucket)
        << (row.cumulative ? "_cum" : "") << ',' << to_string(row.field) << ','
        << row.covered << ',' << row.total << ',' << row.fraction << '\n';
  }
}

}  // namespace kge
