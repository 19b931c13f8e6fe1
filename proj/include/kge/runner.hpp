#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kge/contextualizer.hpp"
#include "kge/ensemble.hpp"
#include "kge/kg_store.hpp"
#include "kge/source_systems.hpp"

namespace kge {

// One source adapter in a run config. `kind` is "mt", "ws", "llm", or
// "recorded"; endpoints fall back to the KGE_*_ENDPOINT env vars so secrets
// never live in the manifest.
struct AdapterSpec {
  std::string kind;
  std::string engine;
  std::string endpoint;
  std::filesystem::path fixture;  // recorded adapters
  std::vector<LanguageTag> source_langs;  // MT; empty = the 7-language default
};

// Support-function setup: exact normalized match for names, embedding
// cosine for descriptions.
struct MatcherSpec {
  std::string mode = "name";  // "name" | "description"
  double threshold = 0.5;
  std::string provider = "fallback";  // "fallback" | "http"
  int dim = 256;
  std::string endpoint;  // http provider; falls back to KGE_EMBED_ENDPOINT
};

struct RunConfig {
  std::filesystem::path snapshot_path;
  std::optional<std::filesystem::path> benchmark_path;
  std::vector<LanguageTag> targets;
  std::vector<AdapterSpec> adapters;
  int lambda_coverage = 2;
  int lambda_precision = 1;
  MatcherSpec matcher;
  std::uint64_t seed = 0;
  int parallelism = 4;
  int adapter_parallelism = 8;
  std::int64_t views_floor = 100;
  MarkerPair markers;
  std::optional<std::filesystem::path> templates;
  std::filesystem::path out_dir;
};

RunConfig load_run_config(const std::filesystem::path& path);  // throws ConfigError

// Adapter instances plus everything they borrow, kept alive together.
struct SourceSet {
  std::vector<std::unique_ptr<CandidateSource>> owned;
  std::shared_ptr<const Contextualizer> contextualizer;
  MatcherConfig matcher;
  std::vector<CandidateSource*> sources() const;
};

// Builds adapters from the config. Throws ConfigError before any network
// traffic when a spec is unusable.
SourceSet build_sources(const RunConfig& config, const KgSnapshot& snapshot);

struct RunSummary {
  int entities = 0;
  int skipped = 0;
  int alignment_failures = 0;
  int source_errors = 0;
  int names_applied = 0;
  std::string entity_selection;  // "all" or the requested id list
};

struct RunOutput {
  // Results per target language, each sorted by entity id.
  std::map<LanguageTag, std::vector<EnhancementResult>> results;
  RunSummary summary;
};

// Enhances every listed entity for every target over a bounded worker pool.
// Output ordering is independent of scheduling.
RunOutput run_enhance(const RunConfig& config, const KgSnapshot& snapshot,
                      const std::vector<std::string>& entity_ids,
                      const SourceSet& sources);

void write_results_jsonl(const std::vector<EnhancementResult>& results, std::ostream& out);
std::vector<EnhancementResult> load_results_jsonl(const std::filesystem::path& path);

// manifest.json: the config echo, seed, and counters that make a run
// reproducible. Contains no timestamps and no secrets.
void write_manifest(const RunConfig& config, const RunSummary& summary, std::ostream& out);

}  // namespace kge
