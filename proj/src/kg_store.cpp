#include "kge/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kge/errors.hpp"
#include "kge/matchers.hpp"
#include "kge/unicode.hpp"

namespace kge {

using nlohmann::json;

const std::vector<std::string>* EntityRecord::names_in(const LanguageTag& lang) const {
  auto it = names.find(lang);
  if (it == names.end() || it->second.empty()) return nullptr;
  return &it->second;
}

const std::string* EntityRecord::description_in(const LanguageTag& lang) const {
  auto it = descriptions.find(lang);
  if (it == descriptions.end() || it->second.empty()) return nullptr;
  return &it->second;
}

const std::vector<std::string>* EntityRecord::instance_of_in(const LanguageTag& lang) const {
  auto it = instance_of.find(lang);
  if (it == instance_of.end() || it->second.empty()) return nullptr;
  return &it->second;
}

std::int64_t EntityRecord::views_in(const LanguageTag& lang) const {
  auto it = page_views.find(lang);
  return it == page_views.end() ? 0 : it->second;
}

std::string_view to_string(PopularityBucket bucket) {
  switch (bucket) {
    case PopularityBucket::Head:
      return "head";
    case PopularityBucket::Torso:
      return "torso";
    case PopularityBucket::Tail:
      return "tail";
  }
  return "tail";
}

KgSnapshot::KgSnapshot(const KgSnapshot& other)
    : entities_(other.entities_), window_(other.window_), audit_log_(other.audit_log_) {
  std::lock_guard lock(other.rank_mutex_);
  rank_cache_ = other.rank_cache_;
}

KgSnapshot::KgSnapshot(KgSnapshot&& other) noexcept
    : entities_(std::move(other.entities_)),
      window_(std::move(other.window_)),
      audit_log_(std::move(other.audit_log_)),
      rank_cache_(std::move(other.rank_cache_)) {}

KgSnapshot& KgSnapshot::operator=(const KgSnapshot& other) {
  if (this != &other) {
    entities_ = other.entities_;
    window_ = other.window_;
    audit_log_ = other.audit_log_;
    std::lock_guard lock(other.rank_mutex_);
    rank_cache_ = other.rank_cache_;
  }
  return *this;
}

KgSnapshot& KgSnapshot::operator=(KgSnapshot&& other) noexcept {
  if (this != &other) {
    entities_ = std::move(other.entities_);
    window_ = std::move(other.window_);
    audit_log_ = std::move(other.audit_log_);
    rank_cache_ = std::move(other.rank_cache_);
  }
  return *this;
}

const EntityRecord* KgSnapshot::find(const std::string& id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

const EntityRecord& KgSnapshot::at(const std::string& id) const {
  const EntityRecord* record = find(id);
  if (!record) throw NotFoundError("unknown entity: " + id);
  return *record;
}

void KgSnapshot::insert(EntityRecord record) {
  if (record.id.empty()) throw ValidationError("entity id must not be empty");
  auto [it, inserted] = entities_.emplace(record.id, std::move(record));
  if (!inserted) throw DuplicateEntityError("duplicate entity id: " + it->first);
}

std::size_t head_count(std::size_t n) { return (n + 9) / 10; }
std::size_t torso_cumulative_count(std::size_t n) { return (n + 1) / 2; }

std::shared_ptr<const KgSnapshot::RankTable> KgSnapshot::rank_table(
    const LanguageTag& lang, std::int64_t views_floor) const {
  const auto key = std::make_pair(lang.code(), views_floor);
  {
    std::lock_guard lock(rank_mutex_);
    auto it = rank_cache_.find(key);
    if (it != rank_cache_.end()) return it->second;
  }

  // views descending, ties by ascending id.
  std::vector<std::pair<std::int64_t, const std::string*>> eligible;
  for (const auto& [id, record] : entities_) {
    std::int64_t views = record.views_in(lang);
    if (views >= views_floor) eligible.emplace_back(views, &id);
  }
  std::sort(eligible.begin(), eligible.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });

  auto table = std::make_shared<RankTable>();
  const std::size_t n = eligible.size();
  const std::size_t head = head_count(n);
  const std::size_t torso = torso_cumulative_count(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    PopularityBucket bucket = rank < head      ? PopularityBucket::Head
                              : rank < torso   ? PopularityBucket::Torso
                                               : PopularityBucket::Tail;
    table->bucket_of.emplace(*eligible[rank].second, bucket);
  }

  std::lock_guard lock(rank_mutex_);
  auto [it, inserted] = rank_cache_.emplace(key, std::move(table));
  return it->second;
}

std::optional<PopularityBucket> KgSnapshot::popularity_bucket(
    const std::string& entity_id, const LanguageTag& lang, std::int64_t views_floor) const {
  at(entity_id);  // not-found check
  auto table = rank_table(lang, views_floor);
  auto it = table->bucket_of.find(entity_id);
  if (it == table->bucket_of.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string dedup_key(std::string_view name) { return canonical_key(name); }

EntityRecord parse_entity(const json& obj, std::size_t line_no) {
  auto fail = [line_no](const std::string& what) -> ParseError {
    std::ostringstream msg;
    msg << "line " << line_no << ": " << what;
    return ParseError(msg.str());
  };

  if (!obj.is_object()) throw fail("expected a JSON object");

  EntityRecord record;
  if (!obj.contains("id") || !obj.at("id").is_string()) {
    throw fail("missing string field \"id\"");
  }
  record.id = obj.at("id").get<std::string>();
  if (record.id.empty()) throw fail("entity id must not be empty");

  auto parse_lang = [&](const std::string& code) -> LanguageTag {
    try {
      return LanguageTag(code);
    } catch (const ValidationError& e) {
      throw fail(e.what());
    }
  };

  if (obj.contains("names")) {
    if (!obj.at("names").is_object()) throw fail("\"names\" must be an object");
    for (const auto& [code, value] : obj.at("names").items()) {
      LanguageTag lang = parse_lang(code);
      if (!value.is_array()) throw fail("names for " + code + " must be an array");
      std::vector<std::string> names;
      std::set<std::string> seen;
      for (const auto& item : value) {
        if (!item.is_string()) throw fail("name entries must be strings");
        std::string name = uni::trim(item.get<std::string>());
        if (name.empty()) throw fail("empty name for entity " + record.id);
        if (!seen.insert(dedup_key(name)).second) {
          throw fail("duplicate name \"" + name + "\" for entity " + record.id + " in " + code);
        }
        names.push_back(std::move(name));
      }
      if (!names.empty()) record.names.emplace(lang, std::move(names));
    }
  }

  if (obj.contains("descriptions")) {
    if (!obj.at("descriptions").is_object()) throw fail("\"descriptions\" must be an object");
    for (const auto& [code, value] : obj.at("descriptions").items()) {
      if (!value.is_string()) throw fail("descriptions must be strings");
      std::string desc = value.get<std::string>();
      if (!desc.empty()) record.descriptions.emplace(parse_lang(code), std::move(desc));
    }
  }

  if (obj.contains("instance_of")) {
    if (!obj.at("instance_of").is_object()) throw fail("\"instance_of\" must be an object");
    for (const auto& [code, value] : obj.at("instance_of").items()) {
      if (!value.is_array()) throw fail("instance_of for " + code + " must be an array");
      std::vector<std::string> labels;
      for (const auto& item : value) {
        if (!item.is_string()) throw fail("instance_of entries must be strings");
        labels.push_back(item.get<std::string>());
      }
      if (!labels.empty()) record.instance_of.emplace(parse_lang(code), std::move(labels));
    }
  }

  if (obj.contains("page_views")) {
    if (!obj.at("page_views").is_object()) throw fail("\"page_views\" must be an object");
    for (const auto& [code, value] : obj.at("page_views").items()) {
      if (!value.is_number_integer()) throw fail("page views must be integers");
      std::int64_t views = value.get<std::int64_t>();
      if (views < 0) throw fail("page views must be non-negative");
      record.page_views.emplace(parse_lang(code), views);
    }
  }

  return record;
}

}  // namespace

KgSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open snapshot file: " + path.string());

  KgSnapshot snapshot;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      std::ostringstream msg;
      msg << "line " << line_no << ": " << e.what();
      throw ParseError(msg.str());
    }
    if (obj.is_object() && obj.contains("window")) {
      // Optional header row: {"window": "..."}.
      if (obj.size() == 1 && obj.at("window").is_string()) {
        snapshot.set_window(obj.at("window").get<std::string>());
        continue;
      }
    }
    snapshot.insert(parse_entity(obj, line_no));
  }
  return snapshot;
}

void save_snapshot(const KgSnapshot& snapshot, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  if (!snapshot.window().empty()) {
    json header;
    header["window"] = snapshot.window();
    out << header.dump() << '\n';
  }
  for (const auto& [id, record] : snapshot.entities()) {
    json obj;
    obj["id"] = id;
    if (!record.names.empty()) {
      json names = json::object();
      for (const auto& [lang, values] : record.names) names[lang.code()] = values;
      obj["names"] = std::move(names);
    }
    if (!record.descriptions.empty()) {
      json descs = json::object();
      for (const auto& [lang, value] : record.descriptions) descs[lang.code()] = value;
      obj["descriptions"] = std::move(descs);
    }
    if (!record.instance_of.empty()) {
      json types = json::object();
      for (const auto& [lang, values] : record.instance_of) types[lang.code()] = values;
      obj["instance_of"] = std::move(types);
    }
    if (!record.page_views.empty()) {
      json views = json::object();
      for (const auto& [lang, value] : record.page_views) views[lang.code()] = value;
      obj["page_views"] = std::move(views);
    }
    out << obj.dump() << '\n';
  }
}

KgSnapshot upsert_names(KgSnapshot snapshot, const std::string& entity_id,
                        const LanguageTag& lang, const std::vector<std::string>& names,
                        const std::string& provenance) {
  auto it = snapshot.entities_.find(entity_id);
  if (it == snapshot.entities_.end()) throw NotFoundError("unknown entity: " + entity_id);

  auto& stored = it->second.names[lang];
  std::set<std::string> seen;
  for (const auto& existing : stored) seen.insert(dedup_key(existing));

  for (const auto& raw : names) {
    std::string name = uni::trim(raw);
    if (name.empty()) throw ValidationError("cannot upsert an empty name");
    if (!seen.insert(dedup_key(name)).second) continue;
    stored.push_back(name);
    snapshot.audit_log_.push_back(AuditEntry{entity_id, lang, name, provenance});
  }
  if (stored.empty()) it->second.names.erase(lang);
  return snapshot;
}

}  // namespace kge
