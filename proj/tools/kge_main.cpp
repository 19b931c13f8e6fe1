#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kge/coverage_audit.hpp"
#include "kge/errors.hpp"
#include "kge/evaluator.hpp"
#include "kge/kg_store.hpp"
#include "kge/runner.hpp"
#include "kge/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct AuditArgs {
  std::string snapshot;
  std::string reference = "en";
  std::string languages;
  std::string field = "names";
  std::string out;
  std::int64_t floor = 100;
  std::string views_agg = "max";
  bool no_cumulative = false;
  bool all_eligible = false;
};

int run_audit(const AuditArgs& args) {
  kge::KgSnapshot snapshot = kge::load_snapshot(args.snapshot);
  kge::LanguageTag reference(args.reference);
  std::vector<kge::LanguageTag> langs = kge::parse_language_list(args.languages);
  if (langs.empty()) throw kge::ConfigError("--languages must list at least one language");

  kge::AuditOptions opts;
  opts.views_floor = args.floor;
  if (args.views_agg == "max") {
    opts.agg = kge::ViewsAgg::Max;
  } else if (args.views_agg == "sum") {
    opts.agg = kge::ViewsAgg::Sum;
  } else {
    throw kge::ConfigError("--views-agg must be max or sum");
  }
  opts.include_cumulative = !args.no_cumulative;
  opts.reference_denominator = !args.all_eligible;

  kge::CoverageTable table = kge::audit_coverage(snapshot, langs, reference,
                                                 kge::audit_field_from(args.field), opts);
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw kge::ConfigError("cannot open for writing: " + args.out);
  kge::write_coverage_csv(table, out);
  std::cout << "wrote " << table.rows.size() << " rows to " << args.out << "\n";
  return kExitOk;
}

struct EnhanceArgs {
  std::string config;
  std::string targets;
  std::string entities;
  bool all = false;
  bool apply = false;
  std::string out;
};

int run_enhance_cmd(const EnhanceArgs& args) {
  kge::RunConfig config = kge::load_run_config(args.config);
  if (!args.targets.empty()) {
    config.targets = kge::parse_language_list(args.targets);
  }
  if (!args.out.empty()) config.out_dir = args.out;
  if (config.targets.empty()) {
    throw kge::ConfigError("no target languages (config \"targets\" or --targets)");
  }
  if (config.out_dir.empty()) {
    throw kge::ConfigError("no output directory (config \"out_dir\" or --out)");
  }
  if (!args.all && args.entities.empty()) {
    throw kge::ConfigError("pass --entities id,id,... or --all");
  }

  kge::KgSnapshot snapshot = kge::load_snapshot(config.snapshot_path);

  std::vector<std::string> entity_ids;
  if (args.all) {
    for (const auto& [id, record] : snapshot.entities()) entity_ids.push_back(id);
  } else {
    std::set<std::string> seen;
    std::size_t pos = 0;
    const std::string& csv = args.entities;
    while (pos <= csv.size()) {
      std::size_t comma = csv.find(',', pos);
      std::string id =
          csv.substr(pos, comma == std::string::npos ? csv.size() - pos : comma - pos);
      if (!id.empty() && seen.insert(id).second) entity_ids.push_back(id);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    for (const auto& id : entity_ids) {
      if (!snapshot.find(id)) throw kge::NotFoundError("unknown entity: " + id);
    }
  }

  // Misconfigured adapters fail here, before any network call.
  kge::SourceSet sources = kge::build_sources(config, snapshot);

  kge::RunOutput output = kge::run_enhance(config, snapshot, entity_ids, sources);
  output.summary.entity_selection = args.all ? "all" : args.entities;

  std::filesystem::create_directories(config.out_dir);
  for (const auto& [target, results] : output.results) {
    std::ofstream out(config.out_dir / ("results_" + target.code() + ".jsonl"),
                      std::ios::binary);
    kge::write_results_jsonl(results, out);
  }

  if (args.apply) {
    kge::KgSnapshot updated = snapshot;
    for (const auto& [target, results] : output.results) {
      for (const auto& result : results) {
        if (result.accepted.empty()) continue;
        std::vector<std::string> names;
        names.reserve(result.accepted.size());
        for (const auto& answer : result.accepted) names.push_back(answer.value);
        const std::size_t before = updated.audit_log().size();
        updated = kge::upsert_names(std::move(updated), result.entity_id, target, names,
                                    "ensemble:lambda=" +
                                        std::to_string(config.lambda_coverage));
        output.summary.names_applied +=
            static_cast<int>(updated.audit_log().size() - before);
      }
    }
    kge::save_snapshot(updated, config.out_dir / "enhanced_snapshot.jsonl");
  }

  {
    std::ofstream out(config.out_dir / "manifest.json", std::ios::binary);
    kge::write_manifest(config, output.summary, out);
  }

  std::cout << "entities=" << output.summary.entities
            << " skipped=" << output.summary.skipped
            << " alignment_failures=" << output.summary.alignment_failures
            << " source_errors=" << output.summary.source_errors;
  if (args.apply) std::cout << " names_applied=" << output.summary.names_applied;
  std::cout << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string benchmark;
  std::string results;
  std::string mode = "strict";
  std::string agg = "macro";
  std::string out;
};

int run_evaluate(const EvaluateArgs& args) {
  if (args.mode != "strict" && args.mode != "relaxed") {
    throw kge::ConfigError("--mode must be strict or relaxed");
  }
  auto benchmark = kge::load_benchmark(args.benchmark);
  auto results = kge::load_results_jsonl(args.results);

  std::vector<kge::PredictionRow> predictions;
  predictions.reserve(results.size());
  for (const auto& result : results) {
    kge::PredictionRow row;
    row.entity_id = result.entity_id;
    row.lang = result.target_lang;
    for (const auto& answer : result.accepted) row.accepted.push_back(answer.value);
    row.flagged = result.flagged_incorrect;
    predictions.push_back(std::move(row));
  }

  if (!predictions.empty()) {
    std::set<std::pair<std::string, std::string>> gold_keys;
    for (const auto& entry : benchmark) {
      gold_keys.emplace(entry.entity_id, entry.lang.code());
    }
    bool any_overlap = false;
    for (const auto& row : predictions) {
      if (gold_keys.count({row.entity_id, row.lang.code()})) {
        any_overlap = true;
        break;
      }
    }
    if (!any_overlap) {
      throw kge::ConfigError("results and benchmark share no (entity, language) pairs");
    }
  }

  kge::EvaluationReport report =
      kge::evaluate(benchmark, predictions, kge::aggregation_mode_from(args.agg));

  std::filesystem::create_directories(args.out);
  {
    std::ofstream out(std::filesystem::path(args.out) / "report.json", std::ios::binary);
    kge::write_report_json(report, out);
  }
  {
    std::ofstream out(std::filesystem::path(args.out) / "report.tsv", std::ios::binary);
    kge::write_report_tsv(report, out, args.mode == "relaxed");
  }

  for (const auto& [lang, lang_report] : report.per_language) {
    const auto& c = args.mode == "relaxed" ? lang_report.relaxed_coverage
                                           : lang_report.coverage;
    const auto& p = args.mode == "relaxed" ? lang_report.relaxed_precision
                                           : lang_report.precision;
    std::cout << lang.code() << " C=" << c.f1 << " P=" << p.f1
              << " n=" << lang_report.n_entities
              << " missing=" << lang_report.missing_predictions << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual knowledge-graph textual-information toolkit"};
  app.set_version_flag("--version", std::string("kge ") + kge::kToolkitVersion +
                                        " (format " +
                                        std::to_string(kge::kFormatVersion) + ")");
  app.require_subcommand(1);

  AuditArgs audit;
  CLI::App* audit_cmd =
      app.add_subcommand("audit", "Per-language coverage by popularity bucket");
  audit_cmd->add_option("--snapshot", audit.snapshot, "Entity JSONL snapshot")->required();
  audit_cmd->add_option("--reference", audit.reference, "Reference language (default en)");
  audit_cmd->add_option("--languages", audit.languages, "Comma-separated languages")
      ->required();
  audit_cmd->add_option("--field", audit.field, "names|descriptions");
  audit_cmd->add_option("--out", audit.out, "Output CSV path")->required();
  audit_cmd->add_option("--floor", audit.floor, "Page-view eligibility floor");
  audit_cmd->add_option("--views-agg", audit.views_agg, "max|sum across languages");
  audit_cmd->add_flag("--no-cumulative", audit.no_cumulative, "Skip cumulative torso rows");
  audit_cmd->add_flag("--all-eligible-denominator", audit.all_eligible,
                      "Denominator = all eligible entities");

  EnhanceArgs enhance;
  CLI::App* enhance_cmd =
      app.add_subcommand("enhance", "Generate and score names for target languages");
  enhance_cmd->add_option("--config", enhance.config, "Run config JSON")->required();
  enhance_cmd->add_option("--targets", enhance.targets, "Override target languages");
  enhance_cmd->add_option("--entities", enhance.entities, "Comma-separated entity ids");
  enhance_cmd->add_flag("--all", enhance.all, "Enhance every entity in the snapshot");
  enhance_cmd->add_flag("--apply", enhance.apply, "Write an updated snapshot");
  enhance_cmd->add_option("--out", enhance.out, "Override output directory");

  EvaluateArgs evaluate;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "Score results against a benchmark");
  evaluate_cmd->add_option("--benchmark", evaluate.benchmark, "Benchmark JSONL")->required();
  evaluate_cmd->add_option("--results", evaluate.results, "Results JSONL")->required();
  evaluate_cmd->add_option("--mode", evaluate.mode, "strict|relaxed");
  evaluate_cmd->add_option("--agg", evaluate.agg, "macro|micro");
  evaluate_cmd->add_option("--out", evaluate.out, "Report output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return kExitUsage;
  }

  try {
    if (audit_cmd->parsed()) return run_audit(audit);
    if (enhance_cmd->parsed()) return run_enhance_cmd(enhance);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate);
    std::cerr << app.help() << "\n";
    return kExitUsage;
  } catch (const kge::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const kge::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const kge::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const kge::NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const kge::DuplicateEntityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
