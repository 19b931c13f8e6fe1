#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "kge/errors.hpp"
#include "kge/kg_store.hpp"

using namespace kge;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

EntityRecord entity_with_views(const std::string& id, std::int64_t views,
                               const std::string& lang = "en") {
  EntityRecord record;
  record.id = id;
  record.names[LanguageTag(lang)] = {"name of " + id};
  record.page_views[LanguageTag(lang)] = views;
  return record;
}

}  // namespace

TEST_CASE("load_snapshot reads well-formed lines") {
  auto path = write_temp(
      "kge_snap_ok.jsonl",
      R"({"id": "Q1", "names": {"en": ["Rome", "Roma"]}, "descriptions": {"en": "capital of Italy"}, "page_views": {"en": 500}})"
      "\n"
      R"({"id": "Q2", "names": {"de": ["Berlin"]}, "instance_of": {"en": ["city"]}})"
      "\n"
      R"({"id": "Q3"})"
      "\n");
  KgSnapshot snapshot = load_snapshot(path);
  CHECK(snapshot.size() == 3);
  CHECK(snapshot.at("Q1").names_in(LanguageTag("en"))->size() == 2);
  CHECK(*snapshot.at("Q1").description_in(LanguageTag("en")) == "capital of Italy");
  CHECK(snapshot.at("Q2").instance_of_in(LanguageTag("en"))->front() == "city");
  CHECK(snapshot.at("Q3").names.empty());
}

TEST_CASE("load_snapshot rejects bad input with line numbers") {
  SUBCASE("empty id") {
    auto path = write_temp("kge_snap_emptyid.jsonl", R"({"id": ""})" "\n");
    CHECK_THROWS_WITH_AS(load_snapshot(path), doctest::Contains("line 1"), ParseError);
  }
  SUBCASE("malformed json") {
    auto path = write_temp("kge_snap_badjson.jsonl", "{\"id\": \"Q1\"}\nnot json\n");
    CHECK_THROWS_WITH_AS(load_snapshot(path), doctest::Contains("line 2"), ParseError);
  }
  SUBCASE("duplicate id") {
    auto path = write_temp("kge_snap_dup.jsonl",
                           "{\"id\": \"Q1\"}\n{\"id\": \"Q1\"}\n");
    CHECK_THROWS_AS(load_snapshot(path), DuplicateEntityError);
  }
  SUBCASE("duplicate name after normalization") {
    auto path = write_temp("kge_snap_dupname.jsonl",
                           R"({"id": "Q1", "names": {"en": ["Roma", "roma"]}})" "\n");
    CHECK_THROWS_AS(load_snapshot(path), ParseError);
  }
  SUBCASE("empty file is an empty snapshot") {
    auto path = write_temp("kge_snap_empty.jsonl", "");
    CHECK(load_snapshot(path).size() == 0);
  }
}

TEST_CASE("popularity buckets follow the ceil(10%/50%) rule") {
  KgSnapshot snapshot;
  for (int i = 1; i <= 10; ++i) {
    snapshot.insert(entity_with_views("Q" + std::to_string(i), 1000 - i * 10));
  }
  const LanguageTag en("en");

  // Q1 has the most views (rank 1 of 10).
  CHECK(snapshot.popularity_bucket("Q1", en) == PopularityBucket::Head);
  CHECK(snapshot.popularity_bucket("Q2", en) == PopularityBucket::Torso);
  CHECK(snapshot.popularity_bucket("Q5", en) == PopularityBucket::Torso);
  CHECK(snapshot.popularity_bucket("Q6", en) == PopularityBucket::Tail);
  CHECK(snapshot.popularity_bucket("Q10", en) == PopularityBucket::Tail);
  CHECK_THROWS_AS(snapshot.popularity_bucket("QX", en), NotFoundError);
}

TEST_CASE("entities under the views floor are ineligible") {
  KgSnapshot snapshot;
  snapshot.insert(entity_with_views("Q1", 99));
  snapshot.insert(entity_with_views("Q2", 100));
  const LanguageTag en("en");
  CHECK(snapshot.popularity_bucket("Q1", en) == std::nullopt);
  CHECK(snapshot.popularity_bucket("Q2", en) == PopularityBucket::Head);
  // The floor is configurable; rank 2 of 2 falls past the top-50% cutoff.
  CHECK(snapshot.popularity_bucket("Q1", en, 50) == PopularityBucket::Tail);
}

TEST_CASE("bucket partition and monotonicity over random snapshots") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 20; ++round) {
    KgSnapshot snapshot;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      snapshot.insert(
          entity_with_views("Q" + std::to_string(i), 100 + static_cast<int>(rng() % 50)));
    }
    const LanguageTag en("en");

    std::size_t heads = 0, torsos = 0, tails = 0;
    for (const auto& [id, record] : snapshot.entities()) {
      auto bucket = snapshot.popularity_bucket(id, en);
      REQUIRE(bucket.has_value());
      if (bucket == PopularityBucket::Head) ++heads;
      if (bucket == PopularityBucket::Torso) ++torsos;
      if (bucket == PopularityBucket::Tail) ++tails;
    }
    const std::size_t total = snapshot.size();
    CHECK(heads + torsos + tails == total);
    CHECK(heads == head_count(total));
    CHECK(heads + torsos == torso_cumulative_count(total));

    // Strictly more views never means a worse bucket. Ties can straddle a
    // bucket boundary; the ascending-id rule decides those.
    for (const auto& [id_a, a] : snapshot.entities()) {
      for (const auto& [id_b, b] : snapshot.entities()) {
        if (a.views_in(en) > b.views_in(en)) {
          auto bucket_a = snapshot.popularity_bucket(id_a, en);
          auto bucket_b = snapshot.popularity_bucket(id_b, en);
          CHECK(static_cast<int>(*bucket_a) <= static_cast<int>(*bucket_b));
        } else if (a.views_in(en) == b.views_in(en) && id_a < id_b) {
          auto bucket_a = snapshot.popularity_bucket(id_a, en);
          auto bucket_b = snapshot.popularity_bucket(id_b, en);
          CHECK(static_cast<int>(*bucket_a) <= static_cast<int>(*bucket_b));
        }
      }
    }
  }
}

TEST_CASE("rank tables are safe under concurrent readers") {
  KgSnapshot snapshot;
  for (int i = 0; i < 200; ++i) {
    EntityRecord record;
    record.id = "Q" + std::to_string(i);
    record.names[LanguageTag("en")] = {"e" + std::to_string(i)};
    record.page_views[LanguageTag("en")] = 100 + (i * 37) % 1000;
    record.page_views[LanguageTag("de")] = 100 + (i * 53) % 1000;
    snapshot.insert(std::move(record));
  }

  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      const LanguageTag lang(t % 2 == 0 ? "en" : "de");
      for (int i = 0; i < 200; ++i) {
        auto bucket = snapshot.popularity_bucket("Q" + std::to_string(i), lang);
        auto again = snapshot.popularity_bucket("Q" + std::to_string(i), lang);
        if (bucket != again) ++mismatches;
      }
    });
  }
  for (auto& thread : threads) thread.join();
  CHECK(mismatches == 0);
}

TEST_CASE("save/load round trip preserves the entity set") {
  KgSnapshot snapshot;
  snapshot.set_window("2022-05..2023-04");
  EntityRecord r1;
  r1.id = "Q312";
  r1.names[LanguageTag("en")] = {"Apple", "Apple Inc."};
  r1.names[LanguageTag("it")] = {"Apple"};
  r1.descriptions[LanguageTag("en")] = "American technology company";
  r1.instance_of[LanguageTag("en")] = {"business"};
  r1.page_views[LanguageTag("en")] = 123456;
  snapshot.insert(r1);
  snapshot.insert(entity_with_views("Q5", 42, "de"));

  auto path = std::filesystem::temp_directory_path() / "kge_roundtrip.jsonl";
  save_snapshot(snapshot, path);
  KgSnapshot loaded = load_snapshot(path);

  REQUIRE(loaded.size() == snapshot.size());
  CHECK(loaded.window() == snapshot.window());
  for (const auto& [id, record] : snapshot.entities()) {
    const EntityRecord& other = loaded.at(id);
    CHECK(other.names == record.names);
    CHECK(other.descriptions == record.descriptions);
    CHECK(other.instance_of == record.instance_of);
    CHECK(other.page_views == record.page_views);
  }

  // A second save is byte-identical.
  auto path2 = std::filesystem::temp_directory_path() / "kge_roundtrip2.jsonl";
  save_snapshot(loaded, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
}

TEST_CASE("upsert_names unions under normalization") {
  KgSnapshot snapshot;
  EntityRecord record;
  record.id = "Q220";
  record.names[LanguageTag("it")] = {"Roma"};
  snapshot.insert(record);
  const LanguageTag it("it");

  SUBCASE("exact duplicate is a no-op") {
    auto updated = upsert_names(snapshot, "Q220", it, {"Roma"}, "test");
    CHECK(updated.at("Q220").names_in(it)->size() == 1);
    CHECK(updated.audit_log().empty());
  }
  SUBCASE("normalized duplicate is a no-op") {
    auto updated = upsert_names(snapshot, "Q220", it, {"roma"}, "test");
    CHECK(updated.at("Q220").names_in(it)->size() == 1);
    CHECK(updated.at("Q220").names_in(it)->front() == "Roma");  // primary kept
    CHECK(updated.audit_log().empty());
  }
  SUBCASE("new name appended with an audit entry") {
    auto updated = upsert_names(snapshot, "Q220", it, {"Rome"}, "ensemble:lambda=2");
    REQUIRE(updated.at("Q220").names_in(it)->size() == 2);
    CHECK(updated.at("Q220").names_in(it)->at(0) == "Roma");
    CHECK(updated.at("Q220").names_in(it)->at(1) == "Rome");
    REQUIRE(updated.audit_log().size() == 1);
    CHECK(updated.audit_log()[0].provenance == "ensemble:lambda=2");
    CHECK(updated.audit_log()[0].name == "Rome");
  }
  SUBCASE("idempotent") {
    auto once = upsert_names(snapshot, "Q220", it, {"Rome", "ROMA"}, "p");
    auto twice = upsert_names(once, "Q220", it, {"Rome", "ROMA"}, "p");
    CHECK(*twice.at("Q220").names_in(it) == *once.at("Q220").names_in(it));
    CHECK(twice.audit_log().size() == once.audit_log().size());
  }
  SUBCASE("unknown entity") {
    CHECK_THROWS_AS(upsert_names(snapshot, "QX", it, {"x"}, "p"), NotFoundError);
  }
  SUBCASE("empty name is a precondition violation") {
    CHECK_THROWS_AS(upsert_names(snapshot, "Q220", it, {"  "}, "p"), ValidationError);
  }
}
