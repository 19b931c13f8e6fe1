#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kge/language.hpp"

namespace kge {

// One knowledge-graph entity. The first name in a language is the primary
// name; the rest are aliases in stored order.
struct EntityRecord {
  std::string id;
  std::map<LanguageTag, std::vector<std::string>> names;
  std::map<LanguageTag, std::string> descriptions;
  std::map<LanguageTag, std::vector<std::string>> instance_of;
  std::map<LanguageTag, std::int64_t> page_views;

  const std::vector<std::string>* names_in(const LanguageTag& lang) const;
  const std::string* description_in(const LanguageTag& lang) const;
  const std::vector<std::string>* instance_of_in(const LanguageTag& lang) const;
  std::int64_t views_in(const LanguageTag& lang) const;  // 0 when absent
};

enum class PopularityBucket { Head, Torso, Tail };

std::string_view to_string(PopularityBucket bucket);

// One name added through upsert_names, with where it came from.
struct AuditEntry {
  std::string entity_id;
  LanguageTag lang;
  std::string name;
  std::string provenance;
};

// Immutable-for-readers snapshot of a knowledge graph. Updates go through
// upsert_names, which consumes a snapshot value and returns the new
// version; writers are serialized by the caller.
class KgSnapshot {
 public:
  KgSnapshot() = default;
  KgSnapshot(const KgSnapshot& other);
  KgSnapshot(KgSnapshot&& other) noexcept;
  KgSnapshot& operator=(const KgSnapshot& other);
  KgSnapshot& operator=(KgSnapshot&& other) noexcept;

  const std::map<std::string, EntityRecord>& entities() const { return entities_; }
  std::size_t size() const { return entities_.size(); }

  const EntityRecord* find(const std::string& id) const;
  const EntityRecord& at(const std::string& id) const;  // throws NotFoundError

  // Inserts a record; throws DuplicateEntityError when the id exists.
  void insert(EntityRecord record);

  const std::string& window() const { return window_; }
  void set_window(std::string window) { window_ = std::move(window); }

  const std::vector<AuditEntry>& audit_log() const { return audit_log_; }

  // Head = top-10%, Torso = top-50% band, Tail = rest of the entities with
  // at least `views_floor` page views in `lang`, ranked by views descending
  // with ties broken by ascending id. Returns nullopt for ineligible
  // entities; throws NotFoundError for unknown ids. Rank tables are
  // computed lazily per (lang, floor) and cached; safe for concurrent reads.
  std::optional<PopularityBucket> popularity_bucket(const std::string& entity_id,
                                                    const LanguageTag& lang,
                                                    std::int64_t views_floor = 100) const;

  friend KgSnapshot upsert_names(KgSnapshot snapshot, const std::string& entity_id,
                                 const LanguageTag& lang,
                                 const std::vector<std::string>& names,
                                 const std::string& provenance);

 private:
  struct RankTable {
    std::map<std::string, PopularityBucket> bucket_of;
  };
  std::shared_ptr<const RankTable> rank_table(const LanguageTag& lang,
                                              std::int64_t views_floor) const;

  std::map<std::string, EntityRecord> entities_;
  std::string window_;
  std::vector<AuditEntry> audit_log_;

  mutable std::mutex rank_mutex_;
  mutable std::map<std::pair<std::string, std::int64_t>, std::shared_ptr<const RankTable>>
      rank_cache_;
};

// Bucket sizes for a population of n eligible entities: |Head| =
// ceil(0.10 n), cumulative |Head ∪ Torso| = ceil(0.50 n).
std::size_t head_count(std::size_t n);
std::size_t torso_cumulative_count(std::size_t n);

// Reads Entity JSONL: one object per line, {"id", "names", "descriptions",
// "instance_of", "page_views"}, every map optional. Later duplicate ids are
// rejected; an empty file yields an empty snapshot.
KgSnapshot load_snapshot(const std::filesystem::path& path);

// Writes the same format with sorted keys, UTF-8, LF line endings.
void save_snapshot(const KgSnapshot& snapshot, const std::filesystem::path& path);

// Unions `names` into the entity's name list under normalized-form dedup,
// preserving the existing primary name. Every added name gets an audit
// entry carrying `provenance`. Idempotent.
KgSnapshot upsert_names(KgSnapshot snapshot, const std::string& entity_id,
                        const LanguageTag& lang, const std::vector<std::string>& names,
                        const std::string& provenance);

}  // namespace kge
