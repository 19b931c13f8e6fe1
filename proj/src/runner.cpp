#include "kge/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kge/errors.hpp"
#include "kge/http_adapters.hpp"
#include "kge/version.hpp"

namespace kge {

using nlohmann::json;

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run config: " + path.string());
  json config;
  try {
    config = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("run config: " + std::string(e.what()));
  }

  RunConfig out;
  try {
    out.snapshot_path = config.at("snapshot").get<std::string>();
    if (config.contains("benchmark")) {
      out.benchmark_path = std::filesystem::path(config.at("benchmark").get<std::string>());
    }
    if (config.contains("targets")) {
      for (const auto& code : config.at("targets")) {
        out.targets.emplace_back(code.get<std::string>());
      }
    }
    if (config.contains("adapters")) {
      for (const auto& spec : config.at("adapters")) {
        AdapterSpec adapter;
        adapter.kind = spec.at("kind").get<std::string>();
        if (spec.contains("engine")) adapter.engine = spec.at("engine").get<std::string>();
        if (spec.contains("endpoint")) {
          adapter.endpoint = spec.at("endpoint").get<std::string>();
        }
        if (spec.contains("fixture")) {
          adapter.fixture = spec.at("fixture").get<std::string>();
        }
        if (spec.contains("source_langs")) {
          for (const auto& code : spec.at("source_langs")) {
            adapter.source_langs.emplace_back(code.get<std::string>());
          }
        }
        out.adapters.push_back(std::move(adapter));
      }
    }
    if (config.contains("lambda_coverage")) {
      out.lambda_coverage = config.at("lambda_coverage").get<int>();
    }
    if (config.contains("lambda_precision")) {
      out.lambda_precision = config.at("lambda_precision").get<int>();
    }
    if (config.contains("matcher")) {
      const auto& matcher = config.at("matcher");
      if (matcher.contains("mode")) out.matcher.mode = matcher.at("mode").get<std::string>();
      if (matcher.contains("threshold")) {
        out.matcher.threshold = matcher.at("threshold").get<double>();
      }
      if (matcher.contains("provider")) {
        out.matcher.provider = matcher.at("provider").get<std::string>();
      }
      if (matcher.contains("dim")) out.matcher.dim = matcher.at("dim").get<int>();
      if (matcher.contains("endpoint")) {
        out.matcher.endpoint = matcher.at("endpoint").get<std::string>();
      }
    }
    if (config.contains("seed")) out.seed = config.at("seed").get<std::uint64_t>();
    if (config.contains("parallelism")) {
      out.parallelism = config.at("parallelism").get<int>();
    }
    if (config.contains("adapter_parallelism")) {
      out.adapter_parallelism = config.at("adapter_parallelism").get<int>();
    }
    if (config.contains("views_floor")) {
      out.views_floor = config.at("views_floor").get<std::int64_t>();
    }
    if (config.contains("markers")) {
      out.markers.open = config.at("markers").at("open").get<std::string>();
      out.markers.close = config.at("markers").at("close").get<std::string>();
    }
    if (config.contains("templates")) {
      out.templates = std::filesystem::path(config.at("templates").get<std::string>());
    }
    if (config.contains("out_dir")) out.out_dir = config.at("out_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError("run config: " + std::string(e.what()));
  } catch (const ValidationError& e) {
    throw ConfigError("run config: " + std::string(e.what()));
  }

  if (out.adapters.empty()) throw ConfigError("run config must list at least one adapter");
  if (out.lambda_coverage < 1 || out.lambda_precision < 1) {
    throw ConfigError("lambda thresholds must be >= 1");
  }
  if (out.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (out.matcher.mode != "name" && out.matcher.mode != "description") {
    throw ConfigError("matcher mode must be \"name\" or \"description\"");
  }
  if (out.matcher.provider != "fallback" && out.matcher.provider != "http") {
    throw ConfigError("matcher provider must be \"fallback\" or \"http\"");
  }

  // Paths in the config resolve relative to the config file.
  const auto base = path.parent_path();
  auto resolve = [&base](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(out.snapshot_path);
  if (out.benchmark_path) resolve(*out.benchmark_path);
  for (auto& adapter : out.adapters) resolve(adapter.fixture);
  if (out.templates) resolve(*out.templates);
  resolve(out.out_dir);
  return out;
}

std::vector<CandidateSource*> SourceSet::sources() const {
  std::vector<CandidateSource*> out;
  out.reserve(owned.size());
  for (const auto& source : owned) out.push_back(source.get());
  return out;
}

SourceSet build_sources(const RunConfig& config, const KgSnapshot& snapshot) {
  SourceSet set;
  auto ctx = config.templates
                 ? std::make_shared<const Contextualizer>(
                       Contextualizer::from_config(*config.templates, config.markers))
                 : std::make_shared<const Contextualizer>(config.markers);
  set.contextualizer = ctx;

  const bool description_mode = config.matcher.mode == "description";
  if (description_mode) {
    std::shared_ptr<EmbeddingProvider> provider;
    if (config.matcher.provider == "http") {
      std::string endpoint = config.matcher.endpoint;
      if (endpoint.empty()) {
        const char* env = std::getenv("KGE_EMBED_ENDPOINT");
        if (env) endpoint = env;
      }
      if (endpoint.empty()) {
        throw ConfigError("http embedding provider needs an endpoint "
                          "(config or KGE_EMBED_ENDPOINT)");
      }
      provider = std::make_shared<HttpEmbeddingProvider>("remote", endpoint,
                                                         config.matcher.dim);
    } else {
      provider = std::make_shared<HashedBagEmbedding>(config.matcher.dim);
    }
    set.matcher = MatcherConfig::descriptions(
        std::make_shared<CachedEmbedding>(std::move(provider)), config.matcher.threshold);
  } else {
    set.matcher = MatcherConfig::names();
  }
  const MarkDirection direction =
      description_mode ? MarkDirection::Description : MarkDirection::Name;

  for (const auto& spec : config.adapters) {
    if (spec.kind == "recorded") {
      if (spec.fixture.empty()) {
        throw ConfigError("recorded adapter needs a \"fixture\" path");
      }
      set.owned.push_back(recorded_source(spec.fixture));
      continue;
    }

    SourceKind kind;
    try {
      kind = source_kind_from(spec.kind);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
    std::string endpoint = spec.endpoint.empty() ? endpoint_from_env(kind) : spec.endpoint;
    if (endpoint.empty()) {
      throw ConfigError("adapter \"" + spec.kind + ":" + spec.engine +
                        "\" has no endpoint (config or KGE_" +
                        std::string(kind == SourceKind::MT   ? "MT"
                                    : kind == SourceKind::WS ? "WS"
                                                             : "LLM") +
                        "_ENDPOINT)");
    }
    const std::string engine = spec.engine.empty() ? spec.kind : spec.engine;
    const std::string api_key = api_key_from_env(kind);

    switch (kind) {
      case SourceKind::MT: {
        auto client = std::make_shared<HttpMtClient>(engine, endpoint, api_key);
        set.owned.push_back(std::make_unique<MtSource>(std::move(client), spec.source_langs,
                                                       ctx, RetryPolicy{},
                                                       config.adapter_parallelism, direction));
        break;
      }
      case SourceKind::WS: {
        auto client = std::make_shared<HttpWsClient>(engine, endpoint, api_key);
        set.owned.push_back(std::make_unique<WsSource>(std::move(client), RetryPolicy{},
                                                       config.adapter_parallelism));
        break;
      }
      case SourceKind::LLM: {
        auto client = std::make_shared<HttpLlmClient>(engine, endpoint, api_key);
        set.owned.push_back(std::make_unique<LlmSource>(
            std::move(client), &snapshot, config.seed, RetryPolicy{}, LanguageTag("en"),
            config.views_floor, config.adapter_parallelism));
        break;
      }
    }
  }
  return set;
}

RunOutput run_enhance(const RunConfig& config, const KgSnapshot& snapshot,
                      const std::vector<std::string>& entity_ids, const SourceSet& set) {
  struct Task {
    const std::string* entity_id;
    const LanguageTag* target;
  };
  std::vector<Task> tasks;
  tasks.reserve(entity_ids.size() * config.targets.size());
  for (const auto& target : config.targets) {
    for (const auto& id : entity_ids) {
      tasks.push_back(Task{&id, &target});
    }
  }

  EnsembleConfig ensemble;
  ensemble.lambda_coverage = config.lambda_coverage;
  ensemble.lambda_precision = config.lambda_precision;
  ensemble.matcher = set.matcher;

  const auto sources = set.sources();
  std::vector<EnhancementResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= tasks.size()) return;
      try {
        const EntityRecord& entity = snapshot.at(*tasks[index].entity_id);
        results[index] =
            enhance_entity(entity, *tasks[index].target,
                           std::span<CandidateSource* const>(sources), ensemble);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(config.parallelism,
                                                  static_cast<int>(tasks.size())));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();
  if (first_error) std::rethrow_exception(first_error);

  RunOutput out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    out.results[*tasks[i].target].push_back(std::move(results[i]));
  }
  for (auto& [target, rows] : out.results) {
    std::sort(rows.begin(), rows.end(),
              [](const EnhancementResult& a, const EnhancementResult& b) {
                return a.entity_id < b.entity_id;
              });
    for (const auto& row : rows) {
      ++out.summary.entities;
      if (row.skipped) ++out.summary.skipped;
      out.summary.alignment_failures += row.alignment_failures;
      out.summary.source_errors += row.source_errors;
    }
  }
  return out;
}

void write_results_jsonl(const std::vector<EnhancementResult>& results, std::ostream& out) {
  for (const auto& result : results) {
    json obj;
    obj["entity"] = result.entity_id;
    obj["target"] = result.target_lang.code();
    json accepted = json::array();
    for (const auto& answer : result.accepted) {
      json entry;
      entry["value"] = answer.value;
      entry["score"] = answer.score;
      json supporters = json::array();
      for (const auto& source : answer.supporters) supporters.push_back(source.str());
      entry["supporters"] = std::move(supporters);
      accepted.push_back(std::move(entry));
    }
    obj["accepted"] = std::move(accepted);
    obj["flagged"] = result.flagged_incorrect;
    obj["skipped"] = result.skipped;
    obj["alignment_failures"] = result.alignment_failures;
    obj["source_errors"] = result.source_errors;
    out << obj.dump() << '\n';
  }
}

std::vector<EnhancementResult> load_results_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open results file: " + path.string());

  std::vector<EnhancementResult> results;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json obj = json::parse(line);
      EnhancementResult result;
      result.entity_id = obj.at("entity").get<std::string>();
      result.target_lang = LanguageTag(obj.at("target").get<std::string>());
      for (const auto& entry : obj.at("accepted")) {
        ScoredAnswer answer;
        answer.value = entry.at("value").get<std::string>();
        answer.score = entry.at("score").get<int>();
        answer.canonical = canonical_key(answer.value);
        result.accepted.push_back(std::move(answer));
      }
      if (obj.contains("flagged")) {
        for (const auto& value : obj.at("flagged")) {
          result.flagged_incorrect.push_back(value.get<std::string>());
        }
      }
      if (obj.contains("skipped")) result.skipped = obj.at("skipped").get<bool>();
      if (obj.contains("alignment_failures")) {
        result.alignment_failures = obj.at("alignment_failures").get<int>();
      }
      if (obj.contains("source_errors")) {
        result.source_errors = obj.at("source_errors").get<int>();
      }
      results.push_back(std::move(result));
    } catch (const json::exception& e) {
      std::ostringstream msg;
      msg << "line " << line_no << ": " << e.what();
      throw ParseError(msg.str());
    }
  }
  return results;
}

void write_manifest(const RunConfig& config, const RunSummary& summary, std::ostream& out) {
  json obj;
  obj["toolkit_version"] = kToolkitVersion;
  obj["format_version"] = kFormatVersion;
  obj["seed"] = config.seed;
  obj["parallelism"] = config.parallelism;
  obj["adapter_parallelism"] = config.adapter_parallelism;
  obj["lambda_coverage"] = config.lambda_coverage;
  obj["lambda_precision"] = config.lambda_precision;
  obj["views_floor"] = config.views_floor;
  obj["snapshot"] = config.snapshot_path.string();
  if (config.benchmark_path) obj["benchmark"] = config.benchmark_path->string();

  json matcher;
  matcher["mode"] = config.matcher.mode;
  matcher["threshold"] = config.matcher.threshold;
  matcher["provider"] = config.matcher.provider;
  matcher["dim"] = config.matcher.dim;
  if (!config.matcher.endpoint.empty()) matcher["endpoint"] = config.matcher.endpoint;
  obj["matcher"] = std::move(matcher);

  json targets = json::array();
  for (const auto& target : config.targets) targets.push_back(target.code());
  obj["targets"] = std::move(targets);

  json adapters = json::array();
  for (const auto& spec : config.adapters) {
    json adapter;
    adapter["kind"] = spec.kind;
    if (!spec.engine.empty()) adapter["engine"] = spec.engine;
    if (!spec.endpoint.empty()) adapter["endpoint"] = spec.endpoint;
    if (!spec.fixture.empty()) adapter["fixture"] = spec.fixture.string();
    if (!spec.source_langs.empty()) {
      json langs = json::array();
      for (const auto& lang : spec.source_langs) langs.push_back(lang.code());
      adapter["source_langs"] = std::move(langs);
    }
    adapters.push_back(std::move(adapter));
  }
  obj["adapters"] = std::move(adapters);

  json markers;
  markers["open"] = config.markers.open;
  markers["close"] = config.markers.close;
  obj["markers"] = std::move(markers);
  if (config.templates) obj["templates"] = config.templates->string();

  if (!summary.entity_selection.empty()) obj["entities"] = summary.entity_selection;

  json counters;
  counters["entities"] = summary.entities;
  counters["skipped"] = summary.skipped;
  counters["alignment_failures"] = summary.alignment_failures;
  counters["source_errors"] = summary.source_errors;
  counters["names_applied"] = summary.names_applied;
  obj["counters"] = std::move(counters);

  out << obj.dump(2) << '\n';
}

}  // namespace kge
