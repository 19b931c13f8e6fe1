#include "kge/matchers.hpp"

#include <cmath>
#include <cstdint>

#include "kge/errors.hpp"
#include "kge/unicode.hpp"

namespace kge {

std::string normalize_name(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < s.size()) {
    char32_t cp = uni::next_codepoint(s, i);
    if (uni::is_punctuation(cp)) continue;
    if (uni::is_whitespace(cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    uni::append_utf8(out, uni::to_lower(cp));
  }
  return out;
}

bool phi_name(std::string_view a, std::string_view b) {
  std::string na = normalize_name(a);
  if (na.empty()) return false;
  return na == normalize_name(b);
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Lowercased tokens split on whitespace and punctuation; CJK codepoints
// tokenize individually.
void for_each_token(std::string_view text, auto&& fn) {
  std::string token;
  std::size_t i = 0;
  auto flush = [&] {
    if (!token.empty()) fn(token);
    token.clear();
  };
  while (i < text.size()) {
    char32_t cp = uni::next_codepoint(text, i);
    if (uni::is_whitespace(cp) || uni::is_punctuation(cp)) {
      flush();
      continue;
    }
    if (uni::is_cjk(cp)) {
      flush();
      uni::append_utf8(token, cp);
      flush();
      continue;
    }
    uni::append_utf8(token, uni::to_lower(cp));
  }
  flush();
}

}  // namespace

std::vector<double> fallback_embed(std::string_view text, int dim) {
  std::vector<double> vec(static_cast<std::size_t>(dim), 0.0);
  for_each_token(text, [&](const std::string& token) {
    vec[fnv1a(token) % static_cast<std::uint64_t>(dim)] += 1.0;
  });
  double norm_sq = 0.0;
  for (double v : vec) norm_sq += v * v;
  if (norm_sq > 0.0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec) v *= inv;
  }
  return vec;
}

HashedBagEmbedding::HashedBagEmbedding(int dim) : name_("hashed-bag"), dim_(dim) {
  if (dim <= 0) throw ValidationError("embedding dimension must be positive");
}

std::vector<double> HashedBagEmbedding::embed(const std::string& text) {
  return fallback_embed(text, dim_);
}

CachedEmbedding::CachedEmbedding(std::shared_ptr<EmbeddingProvider> inner)
    : inner_(std::move(inner)) {}

const std::string& CachedEmbedding::name() const { return inner_->name(); }
int CachedEmbedding::dim() const { return inner_->dim(); }

std::vector<double> CachedEmbedding::embed(const std::string& text) {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(text);
    if (it != cache_.end()) return *it->second;
  }
  auto vec = std::make_shared<const std::vector<double>>(inner_->embed(text));
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(text, vec);
  return *it->second;
}

MatcherConfig MatcherConfig::names() { return MatcherConfig{}; }

MatcherConfig MatcherConfig::descriptions(std::shared_ptr<EmbeddingProvider> provider,
                                          double threshold) {
  MatcherConfig cfg;
  cfg.mode = MatchMode::Description;
  cfg.similarity_threshold = threshold;
  cfg.provider = std::move(provider);
  return cfg;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

bool phi_desc(const std::string& a, const std::string& b, const MatcherConfig& cfg) {
  if (!cfg.provider) throw MatcherError("no embedding provider configured");
  auto va = cfg.provider->embed(a);
  auto vb = cfg.provider->embed(b);
  return cosine_similarity(va, vb) > cfg.similarity_threshold;
}

bool phi(const std::string& a, const std::string& b, const MatcherConfig& cfg) {
  if (cfg.mode == MatchMode::Name) return phi_name(a, b);
  return phi_desc(a, b, cfg);
}

std::string canonical_key(std::string_view value) {
  std::string normal = normalize_name(value);
  if (!normal.empty()) return normal;
  // Keep junk values apart: empty normal forms never merge or match.
  std::string key("\x01");
  key.append(value);
  return key;
}

}  // namespace kge
