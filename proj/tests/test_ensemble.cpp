#include <doctest.h>

#include <algorithm>
#include <random>

#include "kge/ensemble.hpp"
#include "support/oracles.hpp"

using namespace kge;

namespace {

CandidateAnswer cand(const std::string& value, SourceKind kind, const std::string& engine,
                     const std::string& source_lang, const std::string& entity = "Q1") {
  CandidateAnswer answer;
  answer.value = value;
  answer.source = SourceId{kind, engine, LanguageTag(source_lang)};
  answer.target_lang = LanguageTag("it");
  answer.entity_id = entity;
  return answer;
}

const ScoredAnswer* find_canonical(const std::vector<ScoredAnswer>& scored,
                                   const std::string& canonical) {
  for (const auto& answer : scored) {
    if (answer.canonical == canonical) return &answer;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("agreement scores count distinct other sources") {
  MatcherConfig matcher = MatcherConfig::names();
  std::vector<CandidateAnswer> candidates = {
      cand("Roma", SourceKind::MT, "nllb", "en"),
      cand("Roma", SourceKind::MT, "nllb", "de"),
      cand("Rome", SourceKind::WS, "g", "en"),
  };
  auto scored = score_candidates(candidates, matcher);
  REQUIRE(scored.size() == 2);

  const ScoredAnswer* roma = find_canonical(scored, "roma");
  const ScoredAnswer* rome = find_canonical(scored, "rome");
  REQUIRE(roma);
  REQUIRE(rome);
  CHECK(roma->score == 1);
  CHECK(rome->score == 0);
  CHECK(roma->supporters.size() == 1);
  CHECK(roma->value == "Roma");
  // Ranking: score desc, canonical asc.
  CHECK(scored[0].canonical == "roma");

  SUBCASE("selection thresholds") {
    CHECK(select(scored, 2).empty());
    auto lambda1 = select(scored, 1);
    REQUIRE(lambda1.size() == 1);
    CHECK(lambda1[0].value == "Roma");
  }
}

TEST_CASE("a single source never supports itself") {
  MatcherConfig matcher = MatcherConfig::names();
  auto scored = score_candidates({cand("Roma", SourceKind::MT, "nllb", "en")}, matcher);
  REQUIRE(scored.size() == 1);
  CHECK(scored[0].score == 0);
}

TEST_CASE("repeated answers from one source merge without self-support") {
  MatcherConfig matcher = MatcherConfig::names();
  std::vector<CandidateAnswer> candidates = {
      cand("Roma", SourceKind::MT, "nllb", "en"),
      cand("roma", SourceKind::MT, "nllb", "en"),
  };
  auto scored = score_candidates(candidates, matcher);
  REQUIRE(scored.size() == 1);
  CHECK(scored[0].score == 0);
  CHECK(scored[0].canonical == "roma");
}

TEST_CASE("merged surface form is the most frequent raw form") {
  MatcherConfig matcher = MatcherConfig::names();
  SUBCASE("frequency wins") {
    std::vector<CandidateAnswer> candidates = {
        cand("roma", SourceKind::MT, "nllb", "en"),
        cand("Roma", SourceKind::MT, "nllb", "de"),
        cand("roma", SourceKind::WS, "g", "en"),
    };
    auto scored = score_candidates(candidates, matcher);
    REQUIRE(scored.size() == 1);
    CHECK(scored[0].value == "roma");
    CHECK(scored[0].score == 2);
  }
  SUBCASE("ties break shortest then lexicographic") {
    std::vector<CandidateAnswer> candidates = {
        cand("ROMA", SourceKind::MT, "nllb", "en"),
        cand("Roma", SourceKind::MT, "nllb", "de"),
    };
    auto scored = score_candidates(candidates, matcher);
    REQUIRE(scored.size() == 1);
    CHECK(scored[0].value == "ROMA");  // equal length, "ROMA" < "Roma"
  }
}

TEST_CASE("the supporter set excludes the origin source") {
  MatcherConfig matcher = MatcherConfig::names();
  std::vector<CandidateAnswer> candidates = {
      cand("Roma", SourceKind::MT, "nllb", "en"),
      cand("Roma", SourceKind::MT, "nllb", "de"),
      cand("Roma", SourceKind::WS, "g", "en"),
  };
  auto scored = score_candidates(candidates, matcher);
  REQUIRE(scored.size() == 1);
  CHECK(scored[0].score == 2);
  CHECK(scored[0].supporters.size() == 2);
  CHECK_FALSE(scored[0].supporters.contains(scored[0].origin));
}

TEST_CASE("junk values never merge or support") {
  MatcherConfig matcher = MatcherConfig::names();
  std::vector<CandidateAnswer> candidates = {
      cand("...", SourceKind::MT, "nllb", "en"),
      cand("!!!", SourceKind::MT, "nllb", "de"),
      cand("...", SourceKind::WS, "g", "en"),
  };
  auto scored = score_candidates(candidates, matcher);
  // "..." from two sources share a raw-keyed class but cannot support each
  // other through an empty normalized form.
  for (const auto& answer : scored) CHECK(answer.score == 0);
}

TEST_CASE("flag_incorrect keeps only unsupported existing values") {
  MatcherConfig matcher = MatcherConfig::names();
  auto scored = score_candidates(
      {
          cand("Olivier Giroud", SourceKind::MT, "nllb", "en"),
          cand("Olivier Giroud", SourceKind::MT, "nllb", "de"),
      },
      matcher);
  auto accepted = select(scored, 1);

  SUBCASE("misspelled existing value is flagged") {
    auto flagged = flag_incorrect({"Oliver Giroud"}, accepted, matcher);
    REQUIRE(flagged.size() == 1);
    CHECK(flagged[0] == "Oliver Giroud");
  }
  SUBCASE("phi-equal existing value is kept") {
    CHECK(flag_incorrect({"olivier giroud"}, accepted, matcher).empty());
  }
  SUBCASE("empty accepted set flags everything") {
    auto flagged =
        flag_incorrect({"Oliver Giroud", "Giroud"}, std::vector<ScoredAnswer>{}, matcher);
    CHECK(flagged.size() == 2);
  }
}

TEST_CASE("scoring is invariant under input permutation") {
  MatcherConfig matcher = MatcherConfig::names();
  std::vector<CandidateAnswer> candidates = {
      cand("Roma", SourceKind::MT, "nllb", "en"),
      cand("Rome", SourceKind::MT, "nllb", "de"),
      cand("roma", SourceKind::WS, "g", "en"),
      cand("Rome.", SourceKind::LLM, "gpt", "en"),
      cand("Rom", SourceKind::MT, "nllb", "fr"),
  };
  auto reference = score_candidates(candidates, matcher);

  std::mt19937_64 rng(5);
  for (int round = 0; round < 20; ++round) {
    std::shuffle(candidates.begin(), candidates.end(), rng);
    auto scored = score_candidates(candidates, matcher);
    REQUIRE(scored.size() == reference.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
      CHECK(scored[i].canonical == reference[i].canonical);
      CHECK(scored[i].score == reference[i].score);
      CHECK(scored[i].value == reference[i].value);
    }
  }
}

TEST_CASE("random candidate sets agree with the pairwise oracle") {
  MatcherConfig matcher = MatcherConfig::names();
  std::mt19937_64 rng(17);
  const char* surfaces[] = {"v0", "V0", "v0.", "v1", "V1", "v2", "v3", "v4", "v5"};
  const SourceKind kinds[] = {SourceKind::MT, SourceKind::WS, SourceKind::LLM};
  const char* langs[] = {"en", "de", "es", "fr"};

  for (int round = 0; round < 300; ++round) {
    std::vector<CandidateAnswer> candidates;
    const int n_sources = 1 + static_cast<int>(rng() % 8);
    for (int s = 0; s < n_sources; ++s) {
      SourceId source{kinds[rng() % 3], "e" + std::to_string(rng() % 2), LanguageTag(langs[rng() % 4])};
      const int n_answers = static_cast<int>(rng() % 6);
      for (int a = 0; a < n_answers; ++a) {
        CandidateAnswer answer;
        answer.value = surfaces[rng() % 9];
        answer.source = source;
        answer.target_lang = LanguageTag("it");
        answer.entity_id = "Q1";
        candidates.push_back(std::move(answer));
      }
    }

    auto expected = kge::testing::sigma_oracle(candidates);
    auto scored = score_candidates(candidates, matcher);
    REQUIRE(scored.size() == expected.size());
    for (const auto& answer : scored) {
      auto it = expected.find(answer.canonical);
      REQUIRE(it != expected.end());
      CHECK(answer.score == it->second);
      CHECK(answer.score == static_cast<int>(answer.supporters.size()));
    }

    // sigma is bounded by the number of distinct sources minus one.
    std::set<SourceId> distinct;
    for (const auto& candidate : candidates) distinct.insert(candidate.source);
    for (const auto& answer : scored) {
      CHECK(answer.score <= static_cast<int>(distinct.size()) - 1);
    }

    // lambda chains shrink.
    for (int lambda = 1; lambda <= 6; ++lambda) {
      auto wide = select(scored, lambda);
      auto narrow = select(scored, lambda + 1);
      for (const auto& answer : narrow) {
        CHECK(find_canonical(wide, answer.canonical) != nullptr);
      }
      CHECK(narrow.size() <= wide.size());
    }
  }
}

TEST_CASE("k phi-equivalent answers from k sources score k-1") {
  MatcherConfig matcher = MatcherConfig::names();
  std::mt19937_64 rng(23);
  for (int round = 0; round < 50; ++round) {
    const int k = 1 + static_cast<int>(rng() % 7);
    std::vector<CandidateAnswer> candidates;
    for (int s = 0; s < k; ++s) {
      candidates.push_back(
          cand("Same Value", SourceKind::MT, "e", "l" + std::string(1, char('a' + s))));
    }
    auto scored = score_candidates(candidates, matcher);
    REQUIRE(scored.size() == 1);
    CHECK(scored[0].score == k - 1);
  }
}

TEST_CASE("flagged values never phi-match an accepted answer") {
  MatcherConfig matcher = MatcherConfig::names();
  std::mt19937_64 rng(71);
  const char* pool[] = {"a", "A", "b", "c", "d", "e."};
  for (int round = 0; round < 200; ++round) {
    std::vector<CandidateAnswer> candidates;
    const int n = static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) {
      candidates.push_back(
          cand(pool[rng() % 6], SourceKind::MT, "e", std::string(1, char('a' + rng() % 5))));
    }
    auto accepted = select(score_candidates(candidates, matcher), 1);
    std::vector<std::string> existing = {pool[rng() % 6], pool[rng() % 6]};
    auto flagged = flag_incorrect(existing, accepted, matcher);
    for (const auto& value : flagged) {
      for (const auto& answer : accepted) {
        CHECK_FALSE(phi_name(value, answer.value));
      }
    }
  }
}

TEST_CASE("description mode scores with the embedding phi and flags the description") {
  MatcherConfig matcher =
      MatcherConfig::descriptions(std::make_shared<HashedBagEmbedding>());

  std::vector<CandidateAnswer> rows = {
      cand("third planet from the Sun in the Solar System", SourceKind::MT, "nllb", "en",
           "Q2"),
      cand("planet in the Solar System, third from the Sun", SourceKind::MT, "nllb", "de",
           "Q2"),
      cand("a kind of cheese", SourceKind::MT, "nllb", "fr", "Q2"),
  };
  auto scored = score_candidates(rows, matcher);
  // The two paraphrases support each other; the stray answer supports nothing.
  int supported = 0;
  for (const auto& answer : scored) {
    if (answer.score >= 1) ++supported;
  }
  CHECK(supported >= 1);

  EntityRecord entity;
  entity.id = "Q2";
  entity.names[LanguageTag("en")] = {"Earth"};
  entity.descriptions[LanguageTag("en")] = "third planet from the Sun";
  entity.descriptions[LanguageTag("it")] = "formaggio stagionato";  // wrong description

  RecordedSource recorded(rows);
  CandidateSource* sources[] = {&recorded};
  EnsembleConfig config;
  config.matcher = matcher;
  config.lambda_coverage = 1;
  auto result = enhance_entity(entity, LanguageTag("it"), sources, config);
  REQUIRE_FALSE(result.skipped);
  CHECK(!result.accepted.empty());
  // The stored Italian description is unsupported by the accepted answers.
  REQUIRE(result.flagged_incorrect.size() == 1);
  CHECK(result.flagged_incorrect[0] == "formaggio stagionato");
}

TEST_CASE("enhance_entity composes scoring, selection, and flagging") {
  EntityRecord entity;
  entity.id = "Q1";
  entity.names[LanguageTag("en")] = {"Rome"};
  entity.descriptions[LanguageTag("en")] = "capital of Italy";
  entity.names[LanguageTag("it")] = {"Rome", "Roma antica"};

  std::vector<CandidateAnswer> rows = {
      cand("Roma", SourceKind::MT, "nllb", "en"),
      cand("Roma", SourceKind::MT, "nllb", "de"),
      cand("Roma", SourceKind::WS, "g", "en"),
      cand("Urbs", SourceKind::LLM, "gpt", "en"),
  };
  RecordedSource recorded(rows);
  CandidateSource* sources[] = {&recorded};

  EnsembleConfig config;
  config.matcher = MatcherConfig::names();

  auto result = enhance_entity(entity, LanguageTag("it"), sources, config);
  CHECK_FALSE(result.skipped);
  REQUIRE(result.accepted.size() == 1);  // lambda_coverage = 2
  CHECK(result.accepted[0].value == "Roma");
  CHECK(result.accepted[0].score == 2);
  // lambda_precision = 1 admits only Roma; both existing values lack support.
  REQUIRE(result.flagged_incorrect.size() == 2);
  CHECK(result.flagged_incorrect[0] == "Rome");
  CHECK(result.flagged_incorrect[1] == "Roma antica");

  SUBCASE("entities without any usable source language are skipped") {
    EntityRecord bare;
    bare.id = "Q2";
    bare.names[LanguageTag("it")] = {"Solo"};
    auto skipped = enhance_entity(bare, LanguageTag("it"), sources, config);
    CHECK(skipped.skipped);
    CHECK(skipped.accepted.empty());
    CHECK(skipped.flagged_incorrect.empty());
  }
  SUBCASE("no candidates flags every existing value") {
    EntityRecord lonely;
    lonely.id = "Q3";
    lonely.names[LanguageTag("en")] = {"X"};
    lonely.descriptions[LanguageTag("en")] = "thing";
    lonely.names[LanguageTag("it")] = {"Ix"};
    auto result2 = enhance_entity(lonely, LanguageTag("it"), sources, config);
    CHECK_FALSE(result2.skipped);
    CHECK(result2.accepted.empty());
    REQUIRE(result2.flagged_incorrect.size() == 1);
    CHECK(result2.flagged_incorrect[0] == "Ix");
  }
}
