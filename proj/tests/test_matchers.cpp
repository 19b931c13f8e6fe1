#include <doctest.h>

#include <atomic>
#include <cctype>
#include <cmath>
#include <random>
#include <thread>

#include "kge/errors.hpp"
#include "kge/matchers.hpp"
#include "kge/unicode.hpp"

using namespace kge;

namespace {

// Random UTF-8 string over letters, digits, spaces, punctuation, and a few
// non-Latin ranges.
std::string random_unicode(std::mt19937_64& rng, int max_len = 24) {
  static const char32_t pools[][2] = {
      {0x0020, 0x007E},  // ASCII
      {0x00A1, 0x024F},  // Latin supplement/extended
      {0x0400, 0x04FF},  // Cyrillic
      {0x3041, 0x30FE},  // kana
      {0x4E00, 0x4E80},  // Han slice
      {0x0600, 0x06FF},  // Arabic
  };
  std::string out;
  int len = static_cast<int>(rng() % static_cast<std::uint64_t>(max_len));
  for (int i = 0; i < len; ++i) {
    const auto& pool = pools[rng() % 6];
    char32_t cp = pool[0] + static_cast<char32_t>(rng() % (pool[1] - pool[0] + 1));
    uni::append_utf8(out, cp);
  }
  return out;
}

}  // namespace

TEST_CASE("normalize_name strips punctuation and case") {
  CHECK(normalize_name("Michael B. Jordan") == "michael b jordan");
  CHECK(normalize_name("Canary") == "canary");
  CHECK(normalize_name("...") == "");
  CHECK(normalize_name("  A   lot\tof \n space ") == "a lot of space");
  CHECK(normalize_name("rock-and-roll") == "rockandroll");
  CHECK(normalize_name("«Guillemets»") == "guillemets");
  CHECK(normalize_name("ROMA") == "roma");
  CHECK(normalize_name("東京・日本") == "東京日本");  // CJK middle dot is punctuation
}

TEST_CASE("normalize_name is idempotent on random unicode") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    std::string s = random_unicode(rng);
    std::string once = normalize_name(s);
    CHECK(normalize_name(once) == once);
  }
}

TEST_CASE("phi_name matches the documented verdicts") {
  CHECK(phi_name("Michael B Jordan", "Michael B. Jordan"));
  CHECK(phi_name("Canary", "canary"));
  CHECK_FALSE(phi_name("Olivier Giroud", "Oliver Giroud"));
  CHECK_FALSE(phi_name("...", "!!!"));  // empty normalized forms never match
  CHECK_FALSE(phi_name("", ""));
}

TEST_CASE("phi_name is symmetric and reflexive for non-empty forms") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    std::string a = random_unicode(rng);
    std::string b = random_unicode(rng);
    CHECK(phi_name(a, b) == phi_name(b, a));
    if (!normalize_name(a).empty()) CHECK(phi_name(a, a));
  }
}

TEST_CASE("phi_name survives uppercasing and trailing periods") {
  const std::pair<const char*, const char*> pairs[] = {
      {"Rome", "rome"}, {"New York", "new  york"}, {"L'École", "L ecole"}};
  for (const auto& [a, b] : pairs) {
    if (!phi_name(a, b)) continue;
    std::string upper_a = a, upper_b = b;
    for (char& c : upper_a) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (char& c : upper_b) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    CHECK(phi_name(upper_a, upper_b));
    CHECK(phi_name(std::string(a) + ".", std::string(b) + "."));
  }
}

TEST_CASE("fallback_embed basics") {
  auto v = fallback_embed("hello world", 64);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(cosine_similarity(fallback_embed("a b", 256), fallback_embed("b a", 256)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_similarity(fallback_embed("alpha beta", 256),
                          fallback_embed("gamma delta", 256)) ==
        doctest::Approx(0.0).epsilon(1e-12));

  auto zero = fallback_embed("", 16);
  for (double x : zero) CHECK(x == 0.0);
}

TEST_CASE("fallback_embed tokenizes CJK per codepoint") {
  // Shared ideographs overlap even without whitespace.
  double sim = cosine_similarity(fallback_embed("東京都", 256), fallback_embed("東京", 256));
  CHECK(sim > 0.5);
}

TEST_CASE("phi_desc thresholds strictly") {
  struct FixedProvider final : EmbeddingProvider {
    const std::string& name() const override {
      static std::string n = "fixed";
      return n;
    }
    int dim() const override { return 4; }
    std::vector<double> embed(const std::string& text) override {
      if (text == "p") return {1, 0, 0, 0};
      if (text == "q") return {1, 1, 1, 1};  // cosine(p, q) = 1/2 exactly
      return {0, 0, 1, 0};
    }
  };
  MatcherConfig cfg = MatcherConfig::descriptions(std::make_shared<FixedProvider>());

  CHECK(phi_desc("p", "p", cfg));        // cosine 1 > 0.5
  CHECK_FALSE(phi_desc("p", "q", cfg));  // cosine exactly 0.5 is not support
  CHECK_FALSE(phi_desc("p", "r", cfg));  // orthogonal

  SUBCASE("identical paraphrase-like strings under the fallback provider") {
    MatcherConfig bag = MatcherConfig::descriptions(std::make_shared<HashedBagEmbedding>());
    CHECK(phi_desc("third planet from the Sun in the Solar System",
                   "planet in the Solar System, third by distance from the Sun", bag));
    CHECK_FALSE(phi_desc("Italian footballer", "Japanese amusement park", bag));
  }
}

TEST_CASE("phi_desc without a provider is a matcher error") {
  MatcherConfig cfg;
  cfg.mode = MatchMode::Description;
  CHECK_THROWS_AS(phi_desc("a", "b", cfg), MatcherError);
}

TEST_CASE("cached embedding provider memoizes and stays deterministic") {
  struct CountingProvider final : EmbeddingProvider {
    const std::string& name() const override {
      static std::string n = "counting";
      return n;
    }
    int dim() const override { return 8; }
    std::vector<double> embed(const std::string& text) override {
      ++calls;
      return fallback_embed(text, 8);
    }
    std::atomic<int> calls{0};
  };
  auto inner = std::make_shared<CountingProvider>();
  CachedEmbedding cached(inner);

  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) {
        auto v = cached.embed("text " + std::to_string(i % 5));
        CHECK(v.size() == 8);
      }
    });
  }
  for (auto& thread : threads) thread.join();
  // Every distinct text computed at least once; far fewer than 200 calls.
  CHECK(inner->calls >= 5);
  CHECK(inner->calls <= 20);
}
