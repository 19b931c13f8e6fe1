#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kge {

// Unicode-aware lowercase, all punctuation (categories P*) removed,
// whitespace runs collapsed to a single space, ends trimmed. May return
// the empty string; empty forms never match anything.
std::string normalize_name(std::string_view s);

// Support function for entity names: exact match of normalized forms,
// false when the normalized form is empty.
bool phi_name(std::string_view a, std::string_view b);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual const std::string& name() const = 0;
  virtual int dim() const = 0;
  // Deterministic per provider instance: equal text yields equal vectors.
  // Throws MatcherError on failure.
  virtual std::vector<double> embed(const std::string& text) = 0;
};

// Hashed bag-of-tokens embedding, the deterministic built-in provider for
// hermetic runs: lowercase word tokens hashed into `dim` buckets with count
// weights, L2-normalized. Empty text maps to the zero vector.
std::vector<double> fallback_embed(std::string_view text, int dim);

class HashedBagEmbedding final : public EmbeddingProvider {
 public:
  explicit HashedBagEmbedding(int dim = 256);
  const std::string& name() const override { return name_; }
  int dim() const override { return dim_; }
  std::vector<double> embed(const std::string& text) override;

 private:
  std::string name_;
  int dim_;
};

// Thread-safe memoization of another provider, keyed by exact text.
class CachedEmbedding final : public EmbeddingProvider {
 public:
  explicit CachedEmbedding(std::shared_ptr<EmbeddingProvider> inner);
  const std::string& name() const override;
  int dim() const override;
  std::vector<double> embed(const std::string& text) override;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const std::vector<double>>> cache_;
};

enum class MatchMode { Name, Description };

struct MatcherConfig {
  MatchMode mode = MatchMode::Name;
  double similarity_threshold = 0.5;  // descriptions only; strict >
  std::shared_ptr<EmbeddingProvider> provider;  // descriptions only

  static MatcherConfig names();
  static MatcherConfig descriptions(std::shared_ptr<EmbeddingProvider> provider,
                                    double threshold = 0.5);
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Support function for descriptions: cosine similarity of the provider's
// vectors strictly above the threshold. Throws MatcherError when the
// provider fails.
bool phi_desc(const std::string& a, const std::string& b, const MatcherConfig& cfg);

// Dispatches on cfg.mode.
bool phi(const std::string& a, const std::string& b, const MatcherConfig& cfg);

// Key used to group candidates into answer classes. Falls back to a
// non-colliding per-value key when the normalized form is empty, so that
// all-punctuation junk never merges.
std::string canonical_key(std::string_view value);

}  // namespace kge
