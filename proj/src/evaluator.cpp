#include "kge/evaluator.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kge/matchers.hpp"
#include "kge/unicode.hpp"

namespace kge {

using nlohmann::json;

std::vector<BenchmarkEntry> load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open benchmark file: " + path.string());

  std::vector<BenchmarkEntry> entries;
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

    BenchmarkEntry entry;
    try {
      entry.entity_id = obj.at("id").get<std::string>();
      entry.lang = LanguageTag(obj.at("language").get<std::string>());
      for (const auto& item : obj.at("valid")) {
        entry.valid_names.push_back(uni::trim(item.get<std::string>()));
      }
      if (obj.contains("invalid")) {
        for (const auto& item : obj.at("invalid")) {
          entry.invalid_names.push_back(uni::trim(item.get<std::string>()));
        }
      }
    } catch (const json::exception& e) {
      std::ostringstream msg;
      msg << "line " << line_no << ": " << e.what();
      throw ParseError(msg.str());
    }

    if (entry.entity_id.empty()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": entity id must not be empty";
      throw ParseError(msg.str());
    }
    if (entry.valid_names.empty()) {
      throw ValidationError("entity " + entry.entity_id + " (" + entry.lang.code() +
                            "): valid name set must not be empty");
    }
    std::set<std::string> valid_keys;
    for (const auto& name : entry.valid_names) valid_keys.insert(canonical_key(name));
    for (const auto& name : entry.invalid_names) {
      if (valid_keys.count(canonical_key(name))) {
        throw ValidationError("entity " + entry.entity_id + " (" + entry.lang.code() +
                              "): \"" + name +
                              "\" appears in both the valid and invalid sets");
      }
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

MetricTriple make_triple(double ppv, double tpr) {
  MetricTriple triple;
  triple.ppv = ppv;
  triple.tpr = tpr;
  triple.f1 = (ppv + tpr) > 0.0 ? 2.0 * ppv * tpr / (ppv + tpr) : 0.0;
  return triple;
}

namespace {

// phi-distinct representatives of a name list.
std::vector<std::string> dedup_phi(const std::vector<std::string>& values) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& value : values) {
    if (seen.insert(canonical_key(value)).second) out.push_back(value);
  }
  return out;
}

bool member_phi(const std::string& value, const std::vector<std::string>& set) {
  for (const auto& other : set) {
    if (phi_name(value, other)) return true;
  }
  return false;
}

}  // namespace

MatchCounts match_counts(const std::vector<std::string>& gold,
                         const std::vector<std::string>& predicted) {
  const auto gold_set = dedup_phi(gold);
  const auto pred_set = dedup_phi(predicted);

  MatchCounts counts;
  counts.pred_total = pred_set.size();
  counts.gold_total = gold_set.size();
  for (const auto& y : pred_set) {
    if (member_phi(y, gold_set)) ++counts.pred_hits;
  }
  for (const auto& g : gold_set) {
    if (member_phi(g, pred_set)) ++counts.gold_hits;
  }
  return counts;
}

MetricTriple coverage_scores(const std::vector<std::string>& gold,
                             const std::vector<std::string>& predicted) {
  if (dedup_phi(gold).empty()) throw EmptyGoldError("gold name set is empty");
  MatchCounts counts = match_counts(gold, predicted);
  double ppv = counts.pred_total == 0
                   ? 0.0
                   : static_cast<double>(counts.pred_hits) / counts.pred_total;
  double tpr = static_cast<double>(counts.gold_hits) / counts.gold_total;
  return make_triple(ppv, tpr);
}

MetricTriple precision_scores(const std::vector<std::string>& gold_invalid,
                              const std::vector<std::string>& flagged) {
  if (dedup_phi(gold_invalid).empty()) throw EmptyGoldError("gold invalid set is empty");
  return coverage_scores(gold_invalid, flagged);
}

MetricTriple relaxed_scores(const std::vector<std::string>& gold,
                            const std::vector<std::string>& predicted) {
  if (dedup_phi(gold).empty()) throw EmptyGoldError("gold name set is empty");
  bool hit = false;
  for (const auto& y : predicted) {
    if (member_phi(y, gold)) {
      hit = true;
      break;
    }
  }
  double v = hit ? 1.0 : 0.0;
  MetricTriple triple;
  triple.ppv = v;
  triple.tpr = v;
  triple.f1 = v;
  return triple;
}

std::string_view to_string(AggregationMode mode) {
  return mode == AggregationMode::Micro ? "micro" : "macro";
}

AggregationMode aggregation_mode_from(std::string_view s) {
  if (s == "micro") return AggregationMode::Micro;
  if (s == "macro") return AggregationMode::Macro;
  throw ParseError("unknown aggregation mode: \"" + std::string(s) + "\"");
}

MetricTriple aggregate(const std::vector<PerEntityScore>& per_entity, AggregationMode mode) {
  if (per_entity.empty()) throw ValidationError("cannot aggregate an empty score list");

  if (mode == AggregationMode::Macro) {
    MetricTriple sum;
    for (const auto& score : per_entity) {
      sum.ppv += score.triple.ppv;
      sum.tpr += score.triple.tpr;
      sum.f1 += score.triple.f1;
    }
    const double n = static_cast<double>(per_entity.size());
    sum.ppv /= n;
    sum.tpr /= n;
    sum.f1 /= n;
    return sum;
  }

  MatchCounts pooled;
  for (const auto& score : per_entity) {
    pooled.pred_hits += score.counts.pred_hits;
    pooled.pred_total += score.counts.pred_total;
    pooled.gold_hits += score.counts.gold_hits;
    pooled.gold_total += score.counts.gold_total;
  }
  double ppv = pooled.pred_total == 0
                   ? 0.0
                   : static_cast<double>(pooled.pred_hits) / pooled.pred_total;
  double tpr = pooled.gold_total == 0
                   ? 0.0
                   : static_cast<double>(pooled.gold_hits) / pooled.gold_total;
  return make_triple(ppv, tpr);
}

namespace {

struct RelaxedTally {
  int hits = 0;
  int predicting = 0;  // entities with a non-empty prediction
  int golded = 0;      // entities with a non-empty gold set

  MetricTriple triple() const {
    double ppv = predicting == 0 ? 0.0 : static_cast<double>(hits) / predicting;
    double tpr = golded == 0 ? 0.0 : static_cast<double>(hits) / golded;
    return make_triple(ppv, tpr);
  }
};

}  // namespace

EvaluationReport evaluate(const std::vector<BenchmarkEntry>& benchmark,
                          const std::vector<PredictionRow>& predictions,
                          AggregationMode mode) {
  EvaluationReport report;
  report.mode = mode;

  std::map<std::pair<std::string, std::string>, const PredictionRow*> by_key;
  for (const auto& row : predictions) {
    by_key[{row.entity_id, row.lang.code()}] = &row;
  }

  std::map<LanguageTag, std::vector<PerEntityScore>> coverage_scores_by_lang;
  std::map<LanguageTag, std::vector<PerEntityScore>> precision_scores_by_lang;
  std::map<LanguageTag, RelaxedTally> relaxed_cov;
  std::map<LanguageTag, RelaxedTally> relaxed_prec;
  std::set<std::pair<std::string, std::string>> matched;

  static const std::vector<std::string> kNoPredictions;

  for (const auto& entry : benchmark) {
    auto& lang_report = report.per_language[entry.lang];
    ++lang_report.n_entities;

    const PredictionRow* row = nullptr;
    auto it = by_key.find({entry.entity_id, entry.lang.code()});
    if (it != by_key.end()) {
      row = it->second;
      matched.insert(it->first);
    } else {
      ++lang_report.missing_predictions;
    }
    const auto& accepted = row ? row->accepted : kNoPredictions;
    const auto& flagged = row ? row->flagged : kNoPredictions;

    try {
      PerEntityScore score;
      score.entity_id = entry.entity_id;
      score.counts = match_counts(entry.valid_names, accepted);
      score.triple = coverage_scores(entry.valid_names, accepted);
      coverage_scores_by_lang[entry.lang].push_back(std::move(score));

      auto& tally = relaxed_cov[entry.lang];
      ++tally.golded;
      if (!accepted.empty()) ++tally.predicting;
      if (relaxed_scores(entry.valid_names, accepted).f1 > 0.5) ++tally.hits;
    } catch (const EmptyGoldError&) {
      // impossible after benchmark validation; excluded defensively
    }

    if (!entry.invalid_names.empty()) {
      ++lang_report.precision_evaluated;
      PerEntityScore score;
      score.entity_id = entry.entity_id;
      score.counts = match_counts(entry.invalid_names, flagged);
      score.triple = precision_scores(entry.invalid_names, flagged);
      precision_scores_by_lang[entry.lang].push_back(std::move(score));

      auto& tally = relaxed_prec[entry.lang];
      ++tally.golded;
      if (!flagged.empty()) ++tally.predicting;
      if (relaxed_scores(entry.invalid_names, flagged).f1 > 0.5) ++tally.hits;
    }
  }

  for (const auto& row : predictions) {
    if (!matched.count({row.entity_id, row.lang.code()})) {
      report.per_language[row.lang].unmatched_results += 1;
    }
  }

  for (auto& [lang, lang_report] : report.per_language) {
    auto cov_it = coverage_scores_by_lang.find(lang);
    if (cov_it != coverage_scores_by_lang.end() && !cov_it->second.empty()) {
      lang_report.coverage_evaluated = static_cast<int>(cov_it->second.size());
      lang_report.coverage = aggregate(cov_it->second, mode);
    }
    auto prec_it = precision_scores_by_lang.find(lang);
    if (prec_it != precision_scores_by_lang.end() && !prec_it->second.empty()) {
      lang_report.precision = aggregate(prec_it->second, mode);
    }
    auto rc = relaxed_cov.find(lang);
    if (rc != relaxed_cov.end()) lang_report.relaxed_coverage = rc->second.triple();
    auto rp = relaxed_prec.find(lang);
    if (rp != relaxed_prec.end()) lang_report.relaxed_precision = rp->second.triple();
  }
  return report;
}

namespace {

json triple_to_json(const MetricTriple& triple) {
  json obj;
  obj["ppv"] = triple.ppv;
  obj["tpr"] = triple.tpr;
  obj["f1"] = triple.f1;
  return obj;
}

}  // namespace

void write_report_json(const EvaluationReport& report, std::ostream& out) {
  json obj;
  obj["aggregation"] = std::string(to_string(report.mode));
  json langs = json::object();
  for (const auto& [lang, lang_report] : report.per_language) {
    json entry;
    entry["coverage"] = triple_to_json(lang_report.coverage);
    entry["precision"] = triple_to_json(lang_report.precision);
    entry["relaxed_coverage"] = triple_to_json(lang_report.relaxed_coverage);
    entry["relaxed_precision"] = triple_to_json(lang_report.relaxed_precision);
    entry["n_entities"] = lang_report.n_entities;
    entry["coverage_evaluated"] = lang_report.coverage_evaluated;
    entry["precision_evaluated"] = lang_report.precision_evaluated;
    entry["missing_predictions"] = lang_report.missing_predictions;
    entry["unmatched_results"] = lang_report.unmatched_results;
    langs[lang.code()] = std::move(entry);
  }
  obj["per_language"] = std::move(langs);
  out << obj.dump(2) << '\n';
}

void write_report_tsv(const EvaluationReport& report, std::ostream& out, bool relaxed) {
  out << "language\tC\tP\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& [lang, lang_report] : report.per_language) {
    const MetricTriple& c = relaxed ? lang_report.relaxed_coverage : lang_report.coverage;
    const MetricTriple& p = relaxed ? lang_report.relaxed_precision : lang_report.precision;
    out << lang.code() << '\t' << c.f1 << '\t' << p.f1 << '\n';
  }
}

}  // namespace kge
