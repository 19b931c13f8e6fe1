#include "kge/source_systems.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <semaphore>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kge/errors.hpp"
#include "kge/matchers.hpp"
#include "kge/unicode.hpp"

namespace kge {

using nlohmann::json;

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::MT:
      return "mt";
    case SourceKind::WS:
      return "ws";
    case SourceKind::LLM:
      return "llm";
  }
  return "mt";
}

SourceKind source_kind_from(std::string_view s) {
  if (s == "mt") return SourceKind::MT;
  if (s == "ws") return SourceKind::WS;
  if (s == "llm") return SourceKind::LLM;
  throw ParseError("unknown source kind: \"" + std::string(s) + "\"");
}

std::string SourceId::str() const {
  std::string out(to_string(kind));
  out += ':';
  out += engine;
  out += ':';
  out += source_lang.code();
  return out;
}

namespace {

template <typename F>
auto with_retries(const RetryPolicy& policy, F&& fn) -> decltype(fn()) {
  auto delay = policy.base_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const TransportError&) {
      if (attempt >= policy.attempts) throw;
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<CandidateAnswer> mt_candidates(MtClient& client, const SourceRequest& request,
                                           const Contextualizer& ctx,
                                           SourceCounters& counters,
                                           const RetryPolicy& retry) {
  std::string translated;
  try {
    translated = with_retries(retry, [&] {
      return client.translate(request.marked.text, request.source_lang, request.target_lang);
    });
  } catch (const TransportError&) {
    ++counters.source_errors;
    return {};
  }

  std::string span;
  try {
    span = ctx.extract_marked_span(translated);
  } catch (const AlignmentError&) {
    ++counters.alignment_failures;
    return {};
  }

  CandidateAnswer answer;
  answer.value = span;
  answer.source = SourceId{SourceKind::MT, client.engine(), request.source_lang};
  answer.target_lang = request.target_lang;
  answer.entity_id = request.entity_id;
  answer.raw = translated;
  return {std::move(answer)};
}

// --- web-search highlight parsing -----------------------------------------

namespace {

struct Tag {
  std::string name;   // lowercase
  bool closing = false;
  bool self_closing = false;
  std::size_t end = 0;  // offset just past '>'
};

// Parses the tag starting at page[pos] == '<'. Returns nullopt when the
// text is not a tag (a stray '<').
std::optional<Tag> parse_tag(std::string_view page, std::size_t pos) {
  std::size_t i = pos + 1;
  if (i >= page.size()) return std::nullopt;
  Tag tag;
  if (page[i] == '/') {
    tag.closing = true;
    ++i;
  }
  std::size_t name_start = i;
  while (i < page.size() &&
         (std::isalnum(static_cast<unsigned char>(page[i])) || page[i] == '-')) {
    ++i;
  }
  if (i == name_start) return std::nullopt;
  tag.name = ascii_lower(page.substr(name_start, i - name_start));
  std::size_t close = page.find('>', i);
  if (close == std::string_view::npos) return std::nullopt;
  tag.self_closing = close > pos && page[close - 1] == '/';
  tag.end = close + 1;
  return tag;
}

void append_entity_decoded(std::string& out, std::string_view entity) {
  // `entity` is the text between '&' and ';'.
  if (entity == "amp") {
    out += '&';
  } else if (entity == "lt") {
    out += '<';
  } else if (entity == "gt") {
    out += '>';
  } else if (entity == "quot") {
    out += '"';
  } else if (entity == "apos") {
    out += '\'';
  } else if (entity == "nbsp") {
    out += ' ';
  } else if (!entity.empty() && entity[0] == '#') {
    char32_t cp = 0;
    bool ok = entity.size() > 1;
    if (entity.size() > 2 && (entity[1] == 'x' || entity[1] == 'X')) {
      for (std::size_t k = 2; k < entity.size() && ok; ++k) {
        char c = entity[k];
        int digit = c >= '0' && c <= '9'   ? c - '0'
                    : c >= 'a' && c <= 'f' ? c - 'a' + 10
                    : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                           : -1;
        if (digit < 0) {
          ok = false;
        } else {
          cp = cp * 16 + static_cast<char32_t>(digit);
        }
      }
    } else {
      for (std::size_t k = 1; k < entity.size() && ok; ++k) {
        char c = entity[k];
        if (c < '0' || c > '9') {
          ok = false;
        } else {
          cp = cp * 10 + static_cast<char32_t>(c - '0');
        }
      }
    }
    if (ok && cp > 0 && cp <= 0x10FFFF) {
      uni::append_utf8(out, cp);
    } else {
      out += '&';
      out += entity;
      out += ';';
    }
  } else {
    out += '&';
    out += entity;
    out += ';';
  }
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '&') {
      std::size_t semi = text.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 10) {
        append_entity_decoded(out, text.substr(i + 1, semi - i - 1));
        i = semi + 1;
        continue;
      }
    }
    out += text[i];
    ++i;
  }
  return out;
}

std::string normalize_term_whitespace(std::string_view text) {
  std::string out;
  bool pending = false;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = i;
    char32_t cp = uni::next_codepoint(text, i);
    if (uni::is_whitespace(cp)) {
      pending = true;
      continue;
    }
    if (pending && !out.empty()) out += ' ';
    pending = false;
    out.append(text.substr(start, i - start));
  }
  return out;
}

// Extracts highlighted (b/em) terms from one page. Returns false when the
// page is unparseable (a highlight never closes), in which case partial
// terms are discarded.
bool extract_page_highlights(std::string_view page, std::vector<std::string>& terms) {
  std::size_t pos = 0;
  bool capturing = false;
  int nested = 0;
  std::string buffer;

  while (pos < page.size()) {
    char c = page[pos];
    if (c != '<') {
      if (capturing) buffer += c;
      ++pos;
      continue;
    }
    if (page.compare(pos, 4, "<!--") == 0) {
      std::size_t end = page.find("-->", pos + 4);
      if (end == std::string_view::npos) return !capturing;
      pos = end + 3;
      continue;
    }
    if (pos + 1 < page.size() && page[pos + 1] == '!') {
      std::size_t end = page.find('>', pos);
      if (end == std::string_view::npos) return !capturing;
      pos = end + 1;
      continue;
    }
    auto tag = parse_tag(page, pos);
    if (!tag) {
      if (capturing) buffer += c;
      ++pos;
      continue;
    }
    const bool highlight = tag->name == "b" || tag->name == "em";
    if (capturing) {
      if (highlight && !tag->closing && !tag->self_closing) {
        ++nested;  // flattened into the enclosing highlight
      } else if (highlight && tag->closing) {
        if (nested > 0) {
          --nested;
        } else {
          std::string term = normalize_term_whitespace(decode_entities(buffer));
          if (!term.empty()) terms.push_back(std::move(term));
          buffer.clear();
          capturing = false;
        }
      }
      // every other tag contributes nothing to the term text
    } else if (highlight && !tag->closing && !tag->self_closing) {
      capturing = true;
      nested = 0;
      buffer.clear();
    }
    pos = tag->end;
  }
  return !capturing;
}

}  // namespace

std::vector<Highlight> ws_extract_highlights(const std::vector<std::string>& pages,
                                             int* skipped_pages) {
  std::map<std::string, std::size_t> index_of;  // term -> index in `out`
  std::vector<Highlight> out;
  int skipped = 0;

  for (const auto& page : pages) {
    std::vector<std::string> terms;
    if (!extract_page_highlights(page, terms)) {
      ++skipped;
      continue;
    }
    for (auto& term : terms) {
      auto it = index_of.find(term);
      if (it == index_of.end()) {
        index_of.emplace(term, out.size());
        out.push_back(Highlight{std::move(term), 1});
      } else {
        ++out[it->second].freq;
      }
    }
  }
  if (skipped_pages) *skipped_pages = skipped;
  return out;
}

std::vector<CandidateAnswer> ws_candidates(const std::string& name,
                                           const std::string& description,
                                           const LanguageTag& target, WsClient& client,
                                           SourceCounters& counters,
                                           const std::string& entity_id,
                                           const RetryPolicy& retry) {
  const std::string query = name + " (" + description + ") in " + target.english_name();

  std::vector<std::string> pages;
  try {
    pages = with_retries(retry, [&] { return client.search(query, target); });
  } catch (const TransportError&) {
    ++counters.source_errors;
    return {};
  }
  if (pages.size() > 10) pages.resize(10);

  std::vector<Highlight> highlights = ws_extract_highlights(pages);
  std::erase_if(highlights, [](const Highlight& h) { return h.freq < 2; });
  std::stable_sort(highlights.begin(), highlights.end(),
                   [](const Highlight& a, const Highlight& b) { return a.freq > b.freq; });
  if (highlights.size() > 5) highlights.resize(5);

  // The query language is fixed to English.
  const SourceId source{SourceKind::WS, client.engine(), LanguageTag("en")};
  std::vector<CandidateAnswer> out;
  out.reserve(highlights.size());
  for (auto& h : highlights) {
    CandidateAnswer answer;
    answer.value = std::move(h.term);
    answer.source = source;
    answer.target_lang = target;
    answer.entity_id = entity_id;
    out.push_back(std::move(answer));
  }
  return out;
}

// --- LLM prompting ----------------------------------------------------------

std::string build_llm_prompt(const LlmTask& task, const LlmExample& example) {
  const std::string task_name = uni::trim(task.name);
  const std::string task_desc = uni::trim(task.description);
  const std::string ex_name = uni::trim(example.name);
  const std::string ex_desc = uni::trim(example.description);
  const std::string ex_target = uni::trim(example.target_name);

  if (task_name.empty() || task_desc.empty()) {
    throw ValidationError("task name and description must not be empty");
  }
  if (ex_name.empty() || ex_desc.empty() || ex_target.empty()) {
    throw ValidationError("example name, description, and target name must not be empty");
  }
  if (ex_name == task_name) {
    throw ValidationError("example entity must differ from the task entity");
  }

  const std::string lt = task.target.upper();
  std::string prompt;
  prompt += "Task definition: given an entity name in English and a short description of "
            "the entity in English, complete the following with the corresponding entity "
            "name in " + lt + ".\n";
  prompt += "\nExample:\n";
  prompt += "English name: " + ex_name + "\n";
  prompt += "English description: " + ex_desc + "\n";
  prompt += lt + " name: " + ex_target + "\n";
  prompt += "\nTask:\n";
  prompt += "English name: " + task_name + "\n";
  prompt += "English description: " + task_desc + "\n";
  prompt += lt + " name: ";
  return prompt;
}

namespace {

std::string example_answer_from_prompt(const std::string& prompt) {
  std::size_t task_pos = prompt.rfind("\nTask:");
  std::string_view block =
      task_pos == std::string::npos ? std::string_view(prompt)
                                    : std::string_view(prompt).substr(0, task_pos);
  std::size_t marker = block.rfind(" name: ");
  if (marker == std::string_view::npos) return "";
  std::string_view rest = block.substr(marker + 7);
  std::size_t eol = rest.find('\n');
  if (eol != std::string_view::npos) rest = rest.substr(0, eol);
  return uni::trim(rest);
}

bool starts_with_refusal(const std::string& lowered) {
  static const char* kRefusals[] = {
      "as a language model", "as an ai", "i cannot", "i can't", "i am unable", "sorry",
  };
  for (const char* prefix : kRefusals) {
    if (lowered.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

bool strip_wrapping_quotes(std::string& s) {
  static const std::pair<std::string_view, std::string_view> kQuotePairs[] = {
      {"\"", "\""}, {"'", "'"},  {"“", "”"}, {"‘", "’"},
      {"«", "»"}, {"「", "」"}, {"『", "』"},
  };
  for (const auto& [open, close] : kQuotePairs) {
    if (s.size() > open.size() + close.size() &&
        s.compare(0, open.size(), open) == 0 &&
        s.compare(s.size() - close.size(), close.size(), close) == 0) {
      s = s.substr(open.size(), s.size() - open.size() - close.size());
      return true;
    }
  }
  return false;
}

bool strip_trailing_punct(std::string& s) {
  static const std::string_view kTrailing[] = {
      ".", "!", "?", ";", ",", ":", "。", "！", "？", "；", "，",
  };
  for (std::string_view suffix : kTrailing) {
    if (s.size() > suffix.size() &&
        s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s.resize(s.size() - suffix.size());
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<std::string> parse_llm_answer(const std::string& raw,
                                            const std::string& prompt) {
  // First non-empty line of the completion.
  std::string line;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t eol = raw.find('\n', pos);
    std::string_view candidate(raw.data() + pos,
                               (eol == std::string::npos ? raw.size() : eol) - pos);
    line = uni::trim(candidate);
    if (!line.empty()) break;
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  if (line.empty()) return std::nullopt;

  std::string lowered = ascii_lower(line);
  if (starts_with_refusal(lowered)) return std::nullopt;

  // "the name of X in L is Y" preambles keep only the tail.
  if (lowered.rfind("the name of ", 0) == 0) {
    std::size_t is_pos = lowered.rfind(" is ");
    if (is_pos == std::string::npos) return std::nullopt;
    line = uni::trim(std::string_view(line).substr(is_pos + 4));
  }

  bool changed = true;
  while (changed) {
    changed = false;
    changed |= strip_trailing_punct(line);
    changed |= strip_wrapping_quotes(line);
    std::string trimmed = uni::trim(line);
    if (trimmed != line) {
      line = std::move(trimmed);
      changed = true;
    }
  }

  if (line.empty()) return std::nullopt;
  if (uni::codepoint_count(line) > 120) return std::nullopt;
  if (line == example_answer_from_prompt(prompt)) return std::nullopt;
  std::string lowered_final = ascii_lower(line);
  if (lowered_final.find("name:") != std::string::npos ||
      lowered_final.find("description:") != std::string::npos) {
    return std::nullopt;
  }
  return line;
}

// --- adapters ---------------------------------------------------------------

namespace {

// Bounds concurrent in-flight requests per adapter.
class ParallelGuard {
 public:
  explicit ParallelGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~ParallelGuard() { sem_.release(); }
  ParallelGuard(const ParallelGuard&) = delete;
  ParallelGuard& operator=(const ParallelGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

struct EntityContext {
  std::string name;
  std::string context;     // description, or an instance-of label
  bool context_is_class = false;
};

// Primary name plus the best available context in `lang`.
std::optional<EntityContext> context_in(const EntityRecord& entity, const LanguageTag& lang) {
  const auto* names = entity.names_in(lang);
  if (!names) return std::nullopt;
  EntityContext out;
  out.name = (*names)[0];
  if (const std::string* desc = entity.description_in(lang)) {
    out.context = *desc;
    return out;
  }
  if (const auto* labels = entity.instance_of_in(lang)) {
    out.context = (*labels)[0];
    out.context_is_class = true;
    return out;
  }
  return std::nullopt;
}

}  // namespace

MtSource::MtSource(std::shared_ptr<MtClient> client, std::vector<LanguageTag> source_langs,
                   std::shared_ptr<const Contextualizer> ctx, RetryPolicy retry,
                   int max_parallel, MarkDirection direction)
    : client_(std::move(client)),
      source_langs_(std::move(source_langs)),
      ctx_(std::move(ctx)),
      retry_(retry),
      max_parallel_(max_parallel > 0 ? max_parallel : 1),
      direction_(direction),
      semaphore_(max_parallel_) {
  if (source_langs_.empty()) source_langs_ = default_source_langs();
}

std::vector<LanguageTag> MtSource::default_source_langs() {
  return parse_language_list("de,en,es,fr,it,ja,zh");
}

std::string MtSource::describe() const {
  std::string langs;
  for (const auto& lang : source_langs_) {
    if (!langs.empty()) langs += ',';
    langs += lang.code();
  }
  return "mt:" + client_->engine() + ":" + langs;
}

std::vector<CandidateAnswer> MtSource::generate(const EntityRecord& entity,
                                                const LanguageTag& target,
                                                SourceCounters& counters) {
  std::vector<CandidateAnswer> out;
  for (const auto& source_lang : source_langs_) {
    if (source_lang == target) continue;
    auto context = context_in(entity, source_lang);
    if (!context) continue;
    // Description direction needs a real description to mark.
    if (direction_ == MarkDirection::Description && context->context_is_class) continue;

    MarkedSentence marked;
    try {
      marked = context->context_is_class
                   ? ctx_->naturalize_fallback(context->name, context->context, source_lang,
                                               entity.id)
                   : ctx_->naturalize(context->name, context->context, source_lang,
                                      direction_, entity.id);
    } catch (const Error&) {
      continue;  // marker collision or degenerate text; nothing to translate
    }

    SourceRequest request;
    request.entity_id = entity.id;
    request.marked = std::move(marked);
    request.name = context->name;
    request.description = context->context;
    request.source_lang = source_lang;
    request.target_lang = target;

    ParallelGuard guard(semaphore_);
    auto answers = mt_candidates(*client_, request, *ctx_, counters, retry_);
    out.insert(out.end(), std::make_move_iterator(answers.begin()),
               std::make_move_iterator(answers.end()));
  }
  return out;
}

WsSource::WsSource(std::shared_ptr<WsClient> client, RetryPolicy retry, int max_parallel)
    : client_(std::move(client)),
      retry_(retry),
      semaphore_(max_parallel > 0 ? max_parallel : 1) {}

std::string WsSource::describe() const { return "ws:" + client_->engine(); }

std::vector<CandidateAnswer> WsSource::generate(const EntityRecord& entity,
                                                const LanguageTag& target,
                                                SourceCounters& counters) {
  const LanguageTag en("en");
  if (target == en) return {};
  auto context = context_in(entity, en);
  if (!context) return {};
  ParallelGuard guard(semaphore_);
  return ws_candidates(context->name, context->context, target, *client_, counters,
                       entity.id, retry_);
}

LlmSource::LlmSource(std::shared_ptr<LlmClient> client, const KgSnapshot* snapshot,
                     std::uint64_t seed, RetryPolicy retry, LanguageTag prompt_lang,
                     std::int64_t views_floor, int max_parallel)
    : client_(std::move(client)),
      snapshot_(snapshot),
      seed_(seed),
      retry_(retry),
      prompt_lang_(std::move(prompt_lang)),
      views_floor_(views_floor),
      semaphore_(max_parallel > 0 ? max_parallel : 1) {}

std::string LlmSource::describe() const { return "llm:" + client_->engine(); }

std::optional<LlmExample> LlmSource::pick_example(const EntityRecord& entity,
                                                  const LanguageTag& target) {
  if (!snapshot_) return std::nullopt;
  const auto* labels = entity.instance_of_in(prompt_lang_);
  if (!labels) return std::nullopt;
  const std::string& type = (*labels)[0];

  std::shared_ptr<const std::vector<std::string>> pool;
  const auto key = std::make_pair(target.code(), type);
  {
    std::lock_guard lock(pool_mutex_);
    auto it = example_pools_.find(key);
    if (it != example_pools_.end()) pool = it->second;
  }
  if (!pool) {
    auto fresh = std::make_shared<std::vector<std::string>>();
    for (const auto& [id, record] : snapshot_->entities()) {
      const auto* rec_labels = record.instance_of_in(prompt_lang_);
      if (!rec_labels || (*rec_labels)[0] != type) continue;
      if (!record.names_in(prompt_lang_) || !record.description_in(prompt_lang_)) continue;
      if (!record.names_in(target)) continue;
      auto bucket = snapshot_->popularity_bucket(id, prompt_lang_, views_floor_);
      if (bucket != PopularityBucket::Head) continue;
      fresh->push_back(id);
    }
    std::lock_guard lock(pool_mutex_);
    auto [it, inserted] = example_pools_.emplace(key, std::move(fresh));
    pool = it->second;
  }

  // The entity itself never serves as its own example.
  std::vector<const std::string*> usable;
  usable.reserve(pool->size());
  for (const auto& id : *pool) {
    if (id != entity.id) usable.push_back(&id);
  }
  if (usable.empty()) return std::nullopt;

  std::mt19937_64 rng(seed_ ^ fnv1a64(entity.id));
  const std::string& pick = *usable[rng() % usable.size()];
  const EntityRecord& record = snapshot_->at(pick);

  LlmExample example;
  example.name = (*record.names_in(prompt_lang_))[0];
  example.description = *record.description_in(prompt_lang_);
  example.target_name = (*record.names_in(target))[0];
  return example;
}

std::vector<CandidateAnswer> LlmSource::generate(const EntityRecord& entity,
                                                 const LanguageTag& target,
                                                 SourceCounters& counters) {
  if (target == prompt_lang_) return {};
  auto context = context_in(entity, prompt_lang_);
  if (!context) return {};
  auto example = pick_example(entity, target);
  if (!example) return {};

  LlmTask task;
  task.name = context->name;
  task.description = context->context;
  task.target = target;

  std::string prompt;
  try {
    prompt = build_llm_prompt(task, *example);
  } catch (const ValidationError&) {
    return {};
  }

  std::string completion;
  try {
    ParallelGuard guard(semaphore_);
    completion = with_retries(retry_, [&] { return client_->complete(prompt); });
  } catch (const TransportError&) {
    ++counters.source_errors;
    return {};
  }

  auto value = parse_llm_answer(completion, prompt);
  if (!value) {
    ++counters.alignment_failures;  // unusable completion format
    return {};
  }

  CandidateAnswer answer;
  answer.value = *value;
  answer.source = SourceId{SourceKind::LLM, client_->engine(), prompt_lang_};
  answer.target_lang = target;
  answer.entity_id = entity.id;
  answer.raw = completion;
  return {std::move(answer)};
}

RecordedSource::RecordedSource(std::vector<CandidateAnswer> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    by_entity_target_[{rows_[i].entity_id, rows_[i].target_lang.code()}].push_back(i);
  }
}

std::string RecordedSource::describe() const {
  return "recorded:" + std::to_string(rows_.size()) + " rows";
}

std::vector<CandidateAnswer> RecordedSource::generate(const EntityRecord& entity,
                                                      const LanguageTag& target,
                                                      SourceCounters& counters) {
  (void)counters;
  auto it = by_entity_target_.find({entity.id, target.code()});
  if (it == by_entity_target_.end()) return {};
  std::vector<CandidateAnswer> out;
  out.reserve(it->second.size());
  for (std::size_t index : it->second) out.push_back(rows_[index]);
  return out;
}

std::unique_ptr<RecordedSource> recorded_source(const std::filesystem::path& fixture) {
  return std::make_unique<RecordedSource>(load_candidate_jsonl(fixture));
}

std::vector<CandidateAnswer> load_candidate_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open candidate fixture: " + path.string());

  std::vector<CandidateAnswer> rows;
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
    try {
      CandidateAnswer row;
      row.entity_id = obj.at("entity").get<std::string>();
      row.target_lang = LanguageTag(obj.at("target").get<std::string>());
      row.source.kind = source_kind_from(obj.at("kind").get<std::string>());
      row.source.engine = obj.at("engine").get<std::string>();
      row.source.source_lang = LanguageTag(obj.at("source_lang").get<std::string>());
      row.value = uni::trim(obj.at("value").get<std::string>());
      if (row.value.empty()) throw ValidationError("candidate value must not be empty");
      if (obj.contains("raw")) row.raw = obj.at("raw").get<std::string>();
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      std::ostringstream msg;
      msg << "line " << line_no << ": " << e.what();
      throw ParseError(msg.str());
    } catch (const ValidationError& e) {
      std::ostringstream msg;
      msg << "line " << line_no << ": " << e.what();
      throw ParseError(msg.str());
    }
  }
  return rows;
}

void save_candidate_jsonl(const std::vector<CandidateAnswer>& rows,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (const auto& row : rows) {
    json obj;
    obj["entity"] = row.entity_id;
    obj["target"] = row.target_lang.code();
    obj["kind"] = std::string(to_string(row.source.kind));
    obj["engine"] = row.source.engine;
    obj["source_lang"] = row.source.source_lang.code();
    obj["value"] = row.value;
    if (!row.raw.empty()) obj["raw"] = row.raw;
    out << obj.dump() << '\n';
  }
}

}  // namespace kge
