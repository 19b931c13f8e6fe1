#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "kge/contextualizer.hpp"
#include "kge/kg_store.hpp"
#include "kge/language.hpp"

namespace kge {

enum class SourceKind { MT, WS, LLM };

std::string_view to_string(SourceKind kind);
SourceKind source_kind_from(std::string_view s);  // throws ParseError

// Identity of one source system. The same engine queried from two source
// languages counts as two distinct sources for agreement scoring.
struct SourceId {
  SourceKind kind = SourceKind::MT;
  std::string engine;
  LanguageTag source_lang;

  std::string str() const;  // "mt:nllb:de"
  auto operator<=>(const SourceId&) const = default;
};

// One proposed value in the target language from one source system.
struct CandidateAnswer {
  std::string value;
  SourceId source;
  LanguageTag target_lang;
  std::string entity_id;
  std::string raw;  // original system output, kept for audits; may be empty
};

struct SourceRequest {
  std::string entity_id;
  MarkedSentence marked;  // MT
  std::string name;       // WS, LLM
  std::string description;
  LanguageTag source_lang;
  LanguageTag target_lang;
};

struct SourceCounters {
  int alignment_failures = 0;
  int source_errors = 0;

  void merge(const SourceCounters& other) {
    alignment_failures += other.alignment_failures;
    source_errors += other.source_errors;
  }
};

// Transport clients. Implementations must tolerate concurrent calls and
// throw TransportError on failure.
class MtClient {
 public:
  virtual ~MtClient() = default;
  virtual const std::string& engine() const = 0;
  virtual std::string translate(const std::string& text, const LanguageTag& source,
                                const LanguageTag& target) = 0;
};

class WsClient {
 public:
  virtual ~WsClient() = default;
  virtual const std::string& engine() const = 0;
  // Returns result-page HTML documents, best first.
  virtual std::vector<std::string> search(const std::string& query,
                                          const LanguageTag& lang) = 0;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual const std::string& engine() const = 0;
  virtual std::string complete(const std::string& prompt) = 0;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{100};  // doubled after each failure
};

// Translates the marked sentence and recovers the marked span. Returns one
// candidate, or none when the markers do not survive translation (counted
// as an alignment failure) or the transport fails after retries (counted as
// a source error).
std::vector<CandidateAnswer> mt_candidates(MtClient& client, const SourceRequest& request,
                                           const Contextualizer& ctx,
                                           SourceCounters& counters,
                                           const RetryPolicy& retry = {});

struct Highlight {
  std::string term;
  int freq = 0;
};

// Collects the inner text of <b> and <em> elements across all pages. Tag
// names are case-insensitive, nested tags are flattened into the enclosing
// highlight, and whitespace is normalized. Pages whose highlight tags never
// close are skipped and counted.
std::vector<Highlight> ws_extract_highlights(const std::vector<std::string>& pages,
                                             int* skipped_pages = nullptr);

// Queries `<name> (<description>) in <target language name>`, parses the
// top-10 result pages, keeps highlighted terms with frequency >= 2, and
// emits at most the top five by descending frequency (ties by first
// occurrence). The query language is fixed to English.
std::vector<CandidateAnswer> ws_candidates(const std::string& name,
                                           const std::string& description,
                                           const LanguageTag& target, WsClient& client,
                                           SourceCounters& counters,
                                           const std::string& entity_id = "",
                                           const RetryPolicy& retry = {});

struct LlmTask {
  std::string name;
  std::string description;
  LanguageTag target;
};

struct LlmExample {
  std::string name;
  std::string description;
  std::string target_name;
};

// One-shot prompt: task definition, a filled Example block, and a Task
// block ending with "<TARGET> name: ". Throws ValidationError when the
// example is empty or names the task entity itself.
std::string build_llm_prompt(const LlmTask& task, const LlmExample& example);

// Extracts the answer from a raw completion: first non-empty line, known
// preambles and wrapping quotes stripped. Returns nullopt (a format error,
// counted by callers as an alignment failure) when the line is empty after
// stripping, longer than 120 codepoints, copies the prompt's example
// answer, contains template keywords, or is a refusal preamble.
std::optional<std::string> parse_llm_answer(const std::string& raw,
                                            const std::string& prompt);

// Uniform interface over candidate generators, used by the ensemble.
class CandidateSource {
 public:
  virtual ~CandidateSource() = default;
  virtual SourceKind kind() const = 0;
  virtual std::string describe() const = 0;
  virtual std::vector<CandidateAnswer> generate(const EntityRecord& entity,
                                                const LanguageTag& target,
                                                SourceCounters& counters) = 0;
};

// MT engine fanned out over a set of source languages; every language with
// a usable name+context yields an independent view on the entity. In
// description direction the markers wrap the description and the produced
// values are translated descriptions.
class MtSource final : public CandidateSource {
 public:
  MtSource(std::shared_ptr<MtClient> client, std::vector<LanguageTag> source_langs,
           std::shared_ptr<const Contextualizer> ctx, RetryPolicy retry = {},
           int max_parallel = 8, MarkDirection direction = MarkDirection::Name);

  SourceKind kind() const override { return SourceKind::MT; }
  std::string describe() const override;
  std::vector<CandidateAnswer> generate(const EntityRecord& entity,
                                        const LanguageTag& target,
                                        SourceCounters& counters) override;

  // The seven-language default: de, en, es, fr, it, ja, zh.
  static std::vector<LanguageTag> default_source_langs();

 private:
  std::shared_ptr<MtClient> client_;
  std::vector<LanguageTag> source_langs_;
  std::shared_ptr<const Contextualizer> ctx_;
  RetryPolicy retry_;
  int max_parallel_;
  MarkDirection direction_;
  std::counting_semaphore<> semaphore_;  // bounds in-flight requests
};

class WsSource final : public CandidateSource {
 public:
  WsSource(std::shared_ptr<WsClient> client, RetryPolicy retry = {}, int max_parallel = 8);

  SourceKind kind() const override { return SourceKind::WS; }
  std::string describe() const override;
  std::vector<CandidateAnswer> generate(const EntityRecord& entity,
                                        const LanguageTag& target,
                                        SourceCounters& counters) override;

 private:
  std::shared_ptr<WsClient> client_;
  RetryPolicy retry_;
  std::counting_semaphore<> semaphore_;
};

// One-shot-prompts an LLM. The in-context example entity is drawn at random
// (seeded) from head-bucket entities of the same type that already have a
// name in the target language.
class LlmSource final : public CandidateSource {
 public:
  LlmSource(std::shared_ptr<LlmClient> client, const KgSnapshot* snapshot,
            std::uint64_t seed, RetryPolicy retry = {},
            LanguageTag prompt_lang = LanguageTag("en"),
            std::int64_t views_floor = 100, int max_parallel = 8);

  SourceKind kind() const override { return SourceKind::LLM; }
  std::string describe() const override;
  std::vector<CandidateAnswer> generate(const EntityRecord& entity,
                                        const LanguageTag& target,
                                        SourceCounters& counters) override;

 private:
  std::optional<LlmExample> pick_example(const EntityRecord& entity,
                                         const LanguageTag& target);

  std::shared_ptr<LlmClient> client_;
  const KgSnapshot* snapshot_;
  std::uint64_t seed_;
  RetryPolicy retry_;
  LanguageTag prompt_lang_;
  std::int64_t views_floor_;
  std::counting_semaphore<> semaphore_;

  std::mutex pool_mutex_;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<const std::vector<std::string>>>
      example_pools_;  // (target, type) -> candidate example ids
};

// Replays candidates recorded in a Candidate JSONL fixture, keyed by
// (entity_id, source_lang, target_lang). Deterministic; queries for
// unrecorded entities return nothing.
class RecordedSource final : public CandidateSource {
 public:
  explicit RecordedSource(std::vector<CandidateAnswer> rows);

  SourceKind kind() const override { return SourceKind::MT; }  // mixed; nominal
  std::string describe() const override;
  std::vector<CandidateAnswer> generate(const EntityRecord& entity,
                                        const LanguageTag& target,
                                        SourceCounters& counters) override;

  const std::vector<CandidateAnswer>& rows() const { return rows_; }

 private:
  std::vector<CandidateAnswer> rows_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_entity_target_;
};

// Loads a Candidate JSONL fixture: {"entity", "target", "kind", "engine",
// "source_lang", "value"} per line.
std::unique_ptr<RecordedSource> recorded_source(const std::filesystem::path& fixture);

std::vector<CandidateAnswer> load_candidate_jsonl(const std::filesystem::path& path);
void save_candidate_jsonl(const std::vector<CandidateAnswer>& rows,
                          const std::filesystem::path& path);

}  // namespace kge
