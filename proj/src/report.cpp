/*
 * Copyright 2026 The VeriGauge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "verigauge/report.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "verigauge/csv.hpp"
#include "verigauge/plots.hpp"
#include "verigauge/rng.hpp"

namespace verigauge {

namespace {

using nlohmann::json;

[[noreturn]] void fail_schema(const std::string& message) {
  throw AuditError(Errc::SchemaError, message);
}

[[noreturn]] void fail_config(const std::string& message) {
  throw AuditError(Errc::ConfigError, message);
}

void reject_unknown_fields(const json& obj,
                           std::initializer_list<const char*> allowed,
                           const char* where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (item.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) fail_schema(std::string(where) + ": unknown field '" + item.key() + "'");
  }
}

std::string string_value(const json& value, const std::string& where) {
  if (!value.is_string()) fail_schema(where + " must be a string");
  return value.get<std::string>();
}

std::uint64_t unsigned_value(const json& value, const std::string& where) {
  if (!value.is_number_unsigned()) fail_schema(where + " must be a non-negative integer");
  return value.get<std::uint64_t>();
}

// Rates and scores may arrive as JSON numbers or as the decimal strings the
// toolkit itself emits; the string path keeps echoed configs bit-exact.
double rate_value(const json& value, const std::string& where) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) return csv::parse_double(value.get<std::string>());
  fail_schema(where + " must be a number or decimal string");
}

json rate_json(double value) { return json(csv::format_double(value)); }

json config_to_json(const AuditConfig& config) {
  json doc = json::object();
  doc["metadata"] = config.metadata_path;
  if (!config.embeddings_path.empty()) doc["embeddings"] = config.embeddings_path;
  if (config.embeddings_format) {
    doc["embeddings_format"] =
        *config.embeddings_format == EmbeddingFormat::Csv ? "csv" : "packed";
  }
  if (!config.scores_path.empty()) doc["scores"] = config.scores_path;
  if (!config.scored_pairs_path.empty())
    doc["scored_pairs"] = config.scored_pairs_path;
  doc["metric"] = config.metric;
  json policies = json::array();
  for (const auto& policy : config.yoking_policies)
    policies.push_back(policy.constrained_attributes);
  doc["yoking_policies"] = std::move(policies);
  if (!config.stratify_attribute.empty()) doc["stratify"] = config.stratify_attribute;
  json targets = json::array();
  for (double target : config.far_targets) targets.push_back(rate_json(target));
  doc["far_targets"] = std::move(targets);
  if (!config.fixed_thresholds.empty()) {
    json thresholds = json::array();
    for (double t : config.fixed_thresholds) thresholds.push_back(rate_json(t));
    doc["fixed_thresholds"] = std::move(thresholds);
  }
  if (!config.tier_reference.empty()) {
    doc["tier_reference"] = config.tier_reference;
    if (config.tier_spec) {
      json spec = json::object();
      spec["tier_names"] = config.tier_spec->tier_names;
      json edges = json::array();
      for (double edge : config.tier_spec->quantile_edges)
        edges.push_back(rate_json(edge));
      spec["quantile_edges"] = std::move(edges);
      doc["tier_spec"] = std::move(spec);
    }
  }
  if (config.sample_seed) doc["sample_seed"] = *config.sample_seed;
  if (config.max_genuine_pairs) doc["max_genuine_pairs"] = *config.max_genuine_pairs;
  if (config.max_impostor_pairs) doc["max_impostor_pairs"] = *config.max_impostor_pairs;
  if (!config.palette.empty()) doc["palette"] = config.palette;
  return doc;
}

AuditConfig config_from_json(const json& doc) {
  if (!doc.is_object()) fail_schema("config must be a JSON object");
  reject_unknown_fields(doc,
                        {"metadata", "embeddings", "embeddings_format", "scores",
                         "scored_pairs", "metric", "yoking_policies", "stratify",
                         "far_targets", "fixed_thresholds", "tier_reference",
                         "tier_spec", "sample_seed", "max_genuine_pairs",
                         "max_impostor_pairs", "palette"},
                        "config");
  AuditConfig config;
  if (!doc.contains("metadata")) fail_schema("config: missing field 'metadata'");
  config.metadata_path = string_value(doc["metadata"], "config.metadata");
  if (doc.contains("embeddings"))
    config.embeddings_path = string_value(doc["embeddings"], "config.embeddings");
  if (doc.contains("embeddings_format")) {
    config.embeddings_format = embedding_format_from_name(
        string_value(doc["embeddings_format"], "config.embeddings_format"));
  }
  if (doc.contains("scores"))
    config.scores_path = string_value(doc["scores"], "config.scores");
  if (doc.contains("scored_pairs"))
    config.scored_pairs_path = string_value(doc["scored_pairs"], "config.scored_pairs");
  if (doc.contains("metric"))
    config.metric = string_value(doc["metric"], "config.metric");
  if (doc.contains("yoking_policies")) {
    const json& policies = doc["yoking_policies"];
    if (!policies.is_array()) fail_schema("config.yoking_policies must be an array");
    config.yoking_policies.clear();
    for (const auto& entry : policies) {
      if (!entry.is_array())
        fail_schema("config.yoking_policies entries must be attribute arrays");
      YokingPolicy policy;
      for (const auto& name : entry)
        policy.constrained_attributes.push_back(
            string_value(name, "config.yoking_policies attribute"));
      config.yoking_policies.push_back(std::move(policy));
    }
  }
  if (doc.contains("stratify"))
    config.stratify_attribute = string_value(doc["stratify"], "config.stratify");
  if (doc.contains("far_targets")) {
    const json& targets = doc["far_targets"];
    if (!targets.is_array()) fail_schema("config.far_targets must be an array");
    config.far_targets.clear();
    for (const auto& value : targets)
      config.far_targets.push_back(rate_value(value, "config.far_targets entry"));
  }
  if (doc.contains("fixed_thresholds")) {
    const json& thresholds = doc["fixed_thresholds"];
    if (!thresholds.is_array()) fail_schema("config.fixed_thresholds must be an array");
    for (const auto& value : thresholds)
      config.fixed_thresholds.push_back(
          rate_value(value, "config.fixed_thresholds entry"));
  }
  if (doc.contains("tier_reference"))
    config.tier_reference = string_value(doc["tier_reference"], "config.tier_reference");
  if (doc.contains("tier_spec")) {
    const json& spec = doc["tier_spec"];
    if (!spec.is_object()) fail_schema("config.tier_spec must be an object");
    reject_unknown_fields(spec, {"tier_names", "quantile_edges"}, "config.tier_spec");
    if (!spec.contains("tier_names") || !spec.contains("quantile_edges"))
      fail_schema("config.tier_spec requires tier_names and quantile_edges");
    TierSpec tier_spec;
    tier_spec.tier_names.clear();
    tier_spec.quantile_edges.clear();
    if (!spec["tier_names"].is_array())
      fail_schema("config.tier_spec.tier_names must be an array");
    for (const auto& name : spec["tier_names"])
      tier_spec.tier_names.push_back(string_value(name, "config.tier_spec.tier_names entry"));
    if (!spec["quantile_edges"].is_array())
      fail_schema("config.tier_spec.quantile_edges must be an array");
    for (const auto& edge : spec["quantile_edges"])
      tier_spec.quantile_edges.push_back(
          rate_value(edge, "config.tier_spec.quantile_edges entry"));
    config.tier_spec = std::move(tier_spec);
  }
  if (doc.contains("sample_seed"))
    config.sample_seed = unsigned_value(doc["sample_seed"], "config.sample_seed");
  if (doc.contains("max_genuine_pairs"))
    config.max_genuine_pairs =
        unsigned_value(doc["max_genuine_pairs"], "config.max_genuine_pairs");
  if (doc.contains("max_impostor_pairs"))
    config.max_impostor_pairs =
        unsigned_value(doc["max_impostor_pairs"], "config.max_impostor_pairs");
  if (doc.contains("palette")) {
    const json& palette = doc["palette"];
    if (!palette.is_array()) fail_schema("config.palette must be an array");
    for (const auto& color : palette)
      config.palette.push_back(string_value(color, "config.palette entry"));
  }
  config.validate();
  return config;
}

EmbeddingFormat resolve_embedding_format(const AuditConfig& config) {
  if (config.embeddings_format) return *config.embeddings_format;
  const std::string& path = config.embeddings_path;
  const bool csv_ext =
      path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return csv_ext ? EmbeddingFormat::Csv : EmbeddingFormat::Packed;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("VERIGAUGE_THREADS")) {
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(env, &end, 10);
    if (env[0] == '\0' || end == nullptr || *end != '\0' || parsed == 0)
      fail_config("VERIGAUGE_THREADS must be a positive integer");
    return static_cast<std::size_t>(parsed);
  }
  const unsigned hint = std::thread::hardware_concurrency();
  return hint == 0 ? 1 : static_cast<std::size_t>(hint);
}

std::string cell_context(const std::string& policy, const std::string& group,
                         const std::string& tier) {
  return "policy " + policy + ", group " + group + ", tier " + tier;
}

}  // namespace

void AuditConfig::validate() const {
  if (metadata_path.empty()) fail_config("config: metadata path is required");
  const bool has_embeddings = !embeddings_path.empty();
  const int inputs = static_cast<int>(has_embeddings) +
                     static_cast<int>(!scores_path.empty()) +
                     static_cast<int>(!scored_pairs_path.empty());
  if (inputs != 1)
    fail_config(
        "config: exactly one of embeddings, scores, and scored_pairs is required");
  if (!has_embeddings && embeddings_format)
    fail_config("config: embeddings_format requires an embeddings input");
  if (has_embeddings) metric_from_name(metric);
  if (yoking_policies.empty())
    fail_config("config: at least one yoking policy is required");
  std::set<std::string> policy_names;
  for (const auto& policy : yoking_policies) {
    if (!policy_names.insert(policy.name()).second)
      fail_config("config: duplicate yoking policy '" + policy.name() + "'");
  }
  if (far_targets.empty()) fail_config("config: at least one FAR target is required");
  std::set<double> seen_targets;
  for (double target : far_targets) {
    if (!std::isfinite(target) || target <= 0.0 || target > 1.0)
      fail_config("config: FAR targets must lie in (0, 1]");
    if (!seen_targets.insert(target).second)
      fail_config("config: duplicate FAR target " + csv::format_double(target));
  }
  for (double t : fixed_thresholds) {
    if (!std::isfinite(t)) fail_config("config: fixed thresholds must be finite");
  }
  if (tier_spec && tier_reference.empty())
    fail_config("config: tier_spec requires tier_reference");
  if (!tier_reference.empty()) {
    const TierSpec effective = tier_spec.value_or(TierSpec{});
    effective.validate();
    for (const auto& name : effective.tier_names) {
      if (name == kAllTier)
        fail_config("config: tier name 'all' collides with the reserved untiered label");
    }
  }
  if (max_genuine_pairs && *max_genuine_pairs == 0)
    fail_config("config: max_genuine_pairs must be positive");
  if (max_impostor_pairs && *max_impostor_pairs == 0)
    fail_config("config: max_impostor_pairs must be positive");
  for (const auto& color : palette) {
    if (color.empty()) fail_config("config: palette colors must be nonempty");
  }
}

AuditConfig audit_config_from_json_text(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded())
    throw AuditError(Errc::FormatError, "config is not valid JSON");
  return config_from_json(doc);
}

std::string audit_config_to_json_text(const AuditConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

AuditConfig load_audit_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError(Errc::IoError, "cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw AuditError(Errc::IoError, "cannot read config: " + path);
  return audit_config_from_json_text(buffer.str());
}

namespace {

std::string validation_error_message(const ValidationReport& report) {
  std::string message = "dataset validation failed: " +
                        std::to_string(report.errors.size()) + " error(s)";
  if (!report.errors.empty()) {
    message += "; first: " + report.errors.front().code + ": " +
               report.errors.front().message;
  }
  return message;
}

}  // namespace

ValidationError::ValidationError(ValidationReport report)
    : AuditError(Errc::ValidationFailed, validation_error_message(report)),
      report_(std::move(report)) {}

namespace {

// Audited pair universe supplied directly by a scored-pair file instead of
// enumeration; labels have been verified against the metadata.
struct GivenPairs {
  std::vector<ImagePair> genuine;
  std::vector<ImagePair> impostor;
  ScoreTable table;
};

GivenPairs verify_given_pairs(const ScoredPairSet& given, const Dataset& dataset,
                              const std::string& origin) {
  std::unordered_map<std::string, const ImageRecord*> records;
  records.reserve(dataset.records.size());
  for (const auto& record : dataset.records) records[record.image_id] = &record;
  auto record_of = [&records, &origin](const std::string& id) {
    const auto it = records.find(id);
    if (it == records.end()) {
      throw AuditError(Errc::SchemaError,
                       origin + ": pair references unknown image_id " + id);
    }
    return it->second;
  };
  GivenPairs out;
  std::unordered_map<ImagePair, bool, ImagePairHash> seen;
  auto note = [&seen, &origin](const ImagePair& pair) {
    if (!seen.emplace(pair, true).second) {
      throw AuditError(Errc::SchemaError, origin + ": duplicate scored pair (" +
                                              pair.a + ", " + pair.b + ")");
    }
  };
  for (const auto& entry : given.genuine) {
    if (record_of(entry.pair.a)->subject_id != record_of(entry.pair.b)->subject_id) {
      throw AuditError(Errc::SchemaError,
                       origin + ": pair (" + entry.pair.a + ", " + entry.pair.b +
                           ") labeled genuine but subjects differ");
    }
    note(entry.pair);
    out.genuine.push_back(entry.pair);
    out.table.entries[entry.pair] = entry.score;
  }
  for (const auto& entry : given.impostor) {
    if (record_of(entry.pair.a)->subject_id == record_of(entry.pair.b)->subject_id) {
      throw AuditError(Errc::SchemaError,
                       origin + ": pair (" + entry.pair.a + ", " + entry.pair.b +
                           ") labeled impostor but subjects match");
    }
    note(entry.pair);
    out.impostor.push_back(entry.pair);
    out.table.entries[entry.pair] = entry.score;
  }
  return out;
}

// Yoking over a given pair universe: keep impostor pairs whose subjects
// agree on every constrained attribute; count the subjects dropped for
// lacking one, mirroring enumeration-mode accounting.
PairSet filter_given_pairs(const GivenPairs& given, const Dataset& dataset,
                           const YokingPolicy& policy) {
  for (const auto& name : policy.constrained_attributes) {
    if (!dataset.has_attribute(name))
      throw AuditError(Errc::UnknownAttribute, "unknown attribute: " + name);
  }
  PairSet pairs;
  pairs.policy = policy;
  pairs.genuine = given.genuine;
  if (policy.empty()) {
    pairs.impostor = given.impostor;
    return pairs;
  }
  std::unordered_map<std::string, const ImageRecord*> records;
  records.reserve(dataset.records.size());
  for (const auto& record : dataset.records) records[record.image_id] = &record;
  std::set<std::string> dropped_subjects;
  for (const auto& pair : given.impostor) {
    const ImageRecord* a = records.at(pair.a);
    const ImageRecord* b = records.at(pair.b);
    bool keep = true;
    for (const auto& name : policy.constrained_attributes) {
      const auto va = a->attributes.find(name);
      const auto vb = b->attributes.find(name);
      const bool a_missing = va == a->attributes.end();
      const bool b_missing = vb == b->attributes.end();
      if (a_missing) dropped_subjects.insert(a->subject_id);
      if (b_missing) dropped_subjects.insert(b->subject_id);
      if (a_missing || b_missing || va->second != vb->second) {
        keep = false;
        break;
      }
    }
    if (keep) pairs.impostor.push_back(pair);
  }
  pairs.excluded_subjects = dropped_subjects.size();
  return pairs;
}

}  // namespace

AuditArtifacts run_audit_full(const AuditConfig& config) {
  config.validate();
  Dataset dataset = load_metadata(config.metadata_path);
  const bool use_embeddings = !config.embeddings_path.empty();
  const bool use_given_pairs = !config.scored_pairs_path.empty();
  EmbeddingSet embeddings;
  ScoreTable table;
  GivenPairs given;
  Metric metric = Metric::Cosine;
  if (use_embeddings) {
    metric = metric_from_name(config.metric);
    embeddings = load_embeddings(config.embeddings_path, resolve_embedding_format(config));
  } else if (use_given_pairs) {
    given = verify_given_pairs(load_scored_pairs_csv(config.scored_pairs_path),
                               dataset, config.scored_pairs_path);
  } else {
    table = load_scores(config.scores_path);
  }

  std::vector<std::string> audited;
  auto note_attribute = [&audited](const std::string& name) {
    if (!name.empty() &&
        std::find(audited.begin(), audited.end(), name) == audited.end())
      audited.push_back(name);
  };
  note_attribute(config.stratify_attribute);
  for (const auto& policy : config.yoking_policies)
    for (const auto& name : policy.constrained_attributes) note_attribute(name);
  const double smallest_target =
      *std::min_element(config.far_targets.begin(), config.far_targets.end());

  AuditArtifacts artifacts;
  AuditReport& report = artifacts.report;
  report.version = kToolkitVersion;
  report.config = config;
  report.validation = validate_dataset(dataset, audited, smallest_target);
  if (!report.validation.ok()) throw ValidationError(report.validation);

  if (!config.stratify_attribute.empty()) {
    for (const auto& record : dataset.records) {
      const auto it = record.attributes.find(config.stratify_attribute);
      if (it != record.attributes.end() && it->second == kOverallGroup)
        fail_config("stratum value 'overall' collides with the reserved pooled label");
    }
  }

  const bool tiering = !config.tier_reference.empty();
  const TierSpec tier_spec = config.tier_spec.value_or(TierSpec{});
  std::optional<TieredPairs> external_tiers;
  if (tiering && config.tier_reference != "self") {
    external_tiers =
        assign_difficulty_tiers(load_scored_pairs_csv(config.tier_reference), tier_spec);
  }
  const std::uint64_t sample_seed = config.sample_seed.value_or(0);

  struct CellTask {
    std::string policy;
    std::string group;
    std::string tier;
    const ScoredPairSet* scores = nullptr;
  };
  std::deque<ScoredPairSet> storage;
  std::deque<TieredPairs> self_tiers;
  std::vector<CellTask> tasks;
  std::vector<std::pair<std::string, std::vector<std::string>>> strata_by_policy;

  for (std::size_t pi = 0; pi < config.yoking_policies.size(); ++pi) {
    const YokingPolicy& policy = config.yoking_policies[pi];
    const std::string policy_label = policy.name();

    PairSet pairs = use_given_pairs ? filter_given_pairs(given, dataset, policy)
                                    : build_pair_set(dataset, policy);
    if (config.max_genuine_pairs && pairs.genuine.size() > *config.max_genuine_pairs) {
      pairs.genuine = subsample_pairs(pairs.genuine, *config.max_genuine_pairs,
                                      derive_subseed(sample_seed, 2 * pi));
    }
    if (config.max_impostor_pairs && pairs.impostor.size() > *config.max_impostor_pairs) {
      pairs.impostor = subsample_pairs(pairs.impostor, *config.max_impostor_pairs,
                                       derive_subseed(sample_seed, 2 * pi + 1));
    }
    ScoredPairSet full =
        use_embeddings ? score_pairs(pairs, embeddings, metric)
                       : attach_scores(pairs, use_given_pairs ? given.table : table);

    PairAccounting accounting;
    accounting.policy = policy_label;
    accounting.n_genuine = pairs.genuine.size();
    accounting.excluded_subjects = pairs.excluded_subjects;

    struct GroupScores {
      std::string label;
      ScoredPairSet scores;
    };
    std::vector<GroupScores> strata;
    if (config.stratify_attribute.empty()) {
      accounting.n_impostor_within = pairs.impostor.size();
    } else {
      StratifiedPairs stratified =
          stratify_pairs(pairs, dataset, config.stratify_attribute);
      accounting.n_impostor_cross = stratified.cross_group.impostor.size();
      accounting.dropped_missing_attribute = stratified.dropped_missing_attribute;
      std::unordered_map<ImagePair, double, ImagePairHash> score_of;
      score_of.reserve(full.genuine.size() + full.impostor.size());
      for (const auto& scored : full.genuine) score_of.emplace(scored.pair, scored.score);
      for (const auto& scored : full.impostor) score_of.emplace(scored.pair, scored.score);
      for (const auto& [value, subset] : stratified.groups) {
        GroupScores group;
        group.label = value;
        group.scores.policy = full.policy;
        group.scores.metric_name = full.metric_name;
        group.scores.genuine.reserve(subset.genuine.size());
        group.scores.impostor.reserve(subset.impostor.size());
        for (const auto& pair : subset.genuine)
          group.scores.genuine.push_back({pair, score_of.at(pair)});
        for (const auto& pair : subset.impostor)
          group.scores.impostor.push_back({pair, score_of.at(pair)});
        accounting.n_impostor_within += subset.impostor.size();
        strata.push_back(std::move(group));
      }
    }
    report.accounting.push_back(accounting);

    const TieredPairs* tiers = nullptr;
    if (tiering) {
      if (external_tiers) {
        tiers = &*external_tiers;
      } else {
        self_tiers.push_back(assign_difficulty_tiers(full, tier_spec));
        tiers = &self_tiers.back();
      }
    }

    std::vector<std::pair<std::string, const ScoredPairSet*>> labeled;
    storage.push_back(std::move(full));
    labeled.emplace_back(kOverallGroup, &storage.back());
    std::vector<std::string> stratum_labels;
    for (auto& group : strata) {
      stratum_labels.push_back(group.label);
      storage.push_back(std::move(group.scores));
      labeled.emplace_back(group.label, &storage.back());
    }
    strata_by_policy.emplace_back(policy_label, std::move(stratum_labels));

    for (const auto& [group_label, scored] : labeled) {
      auto& distributions = artifacts.scores[{policy_label, group_label}];
      distributions.first = scored->genuine_scores();
      distributions.second = scored->impostor_scores();
      if (!distributions.second.empty()) {
        report.threshold_functions.emplace(
            std::pair<std::string, std::string>{policy_label, group_label},
            threshold_function(distributions.second, group_label));
      }
      tasks.push_back({policy_label, group_label, kAllTier, scored});
      if (tiers != nullptr) {
        auto by_tier = split_by_tier(*scored, *tiers);
        for (const auto& tier_name : tiers->tier_names) {
          storage.push_back(std::move(by_tier.at(tier_name)));
          tasks.push_back({policy_label, group_label, tier_name, &storage.back()});
        }
      }
    }
  }

  struct CellOutput {
    ResultCell cell;
    std::vector<Finding> warnings;
    bool skipped = false;
  };
  std::vector<CellOutput> outputs(tasks.size());

  auto compute_cell = [&config](const CellTask& task, CellOutput& out) {
    ResultCell& cell = out.cell;
    cell.policy = task.policy;
    cell.group = task.group;
    cell.tier = task.tier;
    cell.n_genuine = task.scores->genuine.size();
    cell.n_impostor = task.scores->impostor.size();
    if (cell.n_genuine == 0 || cell.n_impostor == 0) {
      out.skipped = true;
      out.warnings.push_back(
          {"EmptyCell", cell_context(task.policy, task.group, task.tier) + ": no " +
                            (cell.n_genuine == 0 ? "genuine" : "impostor") +
                            " pairs; metrics omitted"});
      return;
    }
    const std::vector<double> genuine = task.scores->genuine_scores();
    const std::vector<double> impostor = task.scores->impostor_scores();
    cell.roc = roc_curve(genuine, impostor);
    cell.auc = auc(cell.roc);
    for (double target : config.far_targets) {
      const VerificationPoint point = vr_at_far(genuine, impostor, target);
      cell.operating_points.push_back(
          {target, point.threshold, point.achieved_far, point.vr, point.unresolvable});
      if (point.unresolvable) {
        out.warnings.push_back(
            {"UnresolvableFar",
             cell_context(task.policy, task.group, task.tier) + ": FAR target " +
                 csv::format_double(target) + " is below the empirical floor 1/" +
                 std::to_string(cell.n_impostor) + "; threshold reported as +inf"});
      }
    }
    for (double t : config.fixed_thresholds) {
      cell.fixed_thresholds.push_back({t, far_at_threshold(impostor, t),
                                       frr_at_threshold(genuine, t),
                                       vr_at_threshold(genuine, t)});
    }
  };

  const std::size_t threads = std::min(worker_count(), tasks.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) compute_cell(tasks[i], outputs[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
      for (;;) {
        const std::size_t index = next.fetch_add(1);
        if (index >= tasks.size()) return;
        try {
          compute_cell(tasks[index], outputs[index]);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (auto& out : outputs) {
    for (auto& warning : out.warnings) report.warnings.push_back(std::move(warning));
    if (!out.skipped) report.results.push_back(std::move(out.cell));
  }

  std::map<std::tuple<std::string, std::string, std::string>, const ResultCell*>
      cell_index;
  for (const auto& cell : report.results)
    cell_index[{cell.policy, cell.group, cell.tier}] = &cell;

  std::vector<std::string> tier_labels{kAllTier};
  if (tiering) {
    tier_labels.insert(tier_labels.end(), tier_spec.tier_names.begin(),
                       tier_spec.tier_names.end());
  }
  for (const auto& [policy_label, stratum_labels] : strata_by_policy) {
    for (const auto& tier : tier_labels) {
      for (const auto& group_a : stratum_labels) {
        const auto cell_a = cell_index.find({policy_label, group_a, tier});
        if (cell_a == cell_index.end()) continue;
        for (const auto& group_b : stratum_labels) {
          if (group_a == group_b) continue;
          const auto cell_b = cell_index.find({policy_label, group_b, tier});
          if (cell_b == cell_index.end()) continue;
          report.auc_gaps.push_back(
              {policy_label, tier, group_a, group_b,
               auc_gap(cell_a->second->auc, cell_b->second->auc)});
          const auto& points_a = cell_a->second->operating_points;
          const auto& points_b = cell_b->second->operating_points;
          for (std::size_t k = 0; k < points_a.size(); ++k) {
            if (points_a[k].unresolvable || points_b[k].unresolvable) continue;
            report.shifts.push_back({policy_label, tier, group_a, group_b,
                                     points_a[k].far_target,
                                     points_b[k].threshold - points_a[k].threshold});
          }
        }
      }
    }
  }
  return artifacts;
}

AuditReport run_audit(const AuditConfig& config) {
  return run_audit_full(config).report;
}

ReportFormat report_format_from_name(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv" || name == "csv-bundle") return ReportFormat::CsvBundle;
  fail_config("unknown report format: " + std::string(name));
}

namespace {

json validation_to_json(const ValidationReport& validation,
                        const std::vector<PairAccounting>& accounting) {
  json doc = json::object();
  json groups = json::object();
  for (const auto& [attribute, values] : validation.attribute_groups) {
    json per_value = json::object();
    for (const auto& [value, tally] : values) {
      per_value[value] = {{"images", tally.images}, {"subjects", tally.subjects}};
    }
    groups[attribute] = std::move(per_value);
  }
  doc["attribute_groups"] = std::move(groups);
  auto findings_json = [](const std::vector<Finding>& findings) {
    json rows = json::array();
    for (const auto& finding : findings)
      rows.push_back({{"code", finding.code}, {"message", finding.message}});
    return rows;
  };
  doc["errors"] = findings_json(validation.errors);
  doc["warnings"] = findings_json(validation.warnings);
  json rows = json::array();
  for (const auto& entry : accounting) {
    rows.push_back({{"policy", entry.policy},
                    {"n_genuine", entry.n_genuine},
                    {"n_impostor_within", entry.n_impostor_within},
                    {"n_impostor_cross", entry.n_impostor_cross},
                    {"excluded_subjects", entry.excluded_subjects},
                    {"dropped_missing_attribute", entry.dropped_missing_attribute}});
  }
  doc["pair_accounting"] = std::move(rows);
  return doc;
}

}  // namespace

std::string report_to_json_text(const AuditReport& report) {
  json doc = json::object();
  doc["version"] = report.version;
  doc["config"] = config_to_json(report.config);
  doc["validation"] = validation_to_json(report.validation, report.accounting);
  json results = json::array();
  for (const auto& cell : report.results) {
    json row = json::object();
    row["policy"] = cell.policy;
    row["group"] = cell.group;
    row["tier"] = cell.tier;
    row["n_genuine"] = cell.n_genuine;
    row["n_impostor"] = cell.n_impostor;
    row["auc"] = rate_json(cell.auc);
    json points = json::array();
    for (const auto& point : cell.operating_points) {
      points.push_back({{"far_target", rate_json(point.far_target)},
                        {"threshold", rate_json(point.threshold)},
                        {"achieved_far", rate_json(point.achieved_far)},
                        {"vr", rate_json(point.vr)}});
    }
    row["operating_points"] = std::move(points);
    json fixed = json::array();
    for (const auto& entry : cell.fixed_thresholds) {
      fixed.push_back({{"t", rate_json(entry.t)},
                       {"far", rate_json(entry.far)},
                       {"frr", rate_json(entry.frr)},
                       {"vr", rate_json(entry.vr)}});
    }
    row["fixed_thresholds"] = std::move(fixed);
    results.push_back(std::move(row));
  }
  doc["results"] = std::move(results);
  json shifts = json::array();
  for (const auto& shift : report.shifts) {
    shifts.push_back({{"policy", shift.policy},
                      {"tier", shift.tier},
                      {"group_a", shift.group_a},
                      {"group_b", shift.group_b},
                      {"far_target", rate_json(shift.far_target)},
                      {"shift", rate_json(shift.shift)}});
  }
  doc["shifts"] = std::move(shifts);
  json gaps = json::array();
  for (const auto& gap : report.auc_gaps) {
    gaps.push_back({{"policy", gap.policy},
                    {"tier", gap.tier},
                    {"group_a", gap.group_a},
                    {"group_b", gap.group_b},
                    {"gap", rate_json(gap.gap)}});
  }
  doc["auc_gaps"] = std::move(gaps);
  json warnings = json::array();
  for (const auto& warning : report.warnings)
    warnings.push_back({{"code", warning.code}, {"message", warning.message}});
  doc["warnings"] = std::move(warnings);
  return doc.dump(2) + "\n";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (const unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string slugify(const std::string& label) {
  std::string out;
  out.reserve(label.size());
  for (const char c : label) {
    const auto uc = static_cast<unsigned char>(c);
    out += (std::isalnum(uc) != 0 || c == '-' || c == '_') ? c : '_';
  }
  if (out.empty()) out = "_";
  return out;
}

namespace {

struct EmittedFile {
  std::string name;
  std::string content;
};

class FileSet {
 public:
  void add(std::string name, std::string content) {
    if (!names_.insert(name).second)
      throw AuditError(Errc::IoError,
                       "output filename collision after slugging: " + name);
    files_.push_back({std::move(name), std::move(content)});
  }

  std::vector<EmittedFile>& files() { return files_; }

 private:
  std::vector<EmittedFile> files_;
  std::set<std::string> names_;
};

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  csv::write_record(out, header);
  for (const auto& row : rows) csv::write_record(out, row);
  return out.str();
}

void add_curve_files(FileSet& files, const AuditReport& report) {
  for (const auto& cell : report.results) {
    std::ostringstream out;
    write_roc_csv(out, cell.roc);
    files.add("roc_" + slugify(cell.policy) + "_" + slugify(cell.group) + "_" +
                  slugify(cell.tier) + ".csv",
              out.str());
  }
  for (const auto& [key, function] : report.threshold_functions) {
    std::ostringstream out;
    write_threshold_function_csv(out, function);
    files.add("thresholds_" + slugify(key.first) + "_" + slugify(key.second) + ".csv",
              out.str());
  }
}

void add_table_files(FileSet& files, const AuditReport& report) {
  files.add("config.json", audit_config_to_json_text(report.config));
  files.add("version.csv", table_csv({"version"}, {{report.version}}));

  std::vector<std::vector<std::string>> validation_rows;
  for (const auto& finding : report.validation.errors)
    validation_rows.push_back({"error", finding.code, finding.message});
  for (const auto& finding : report.validation.warnings)
    validation_rows.push_back({"warning", finding.code, finding.message});
  files.add("validation.csv", table_csv({"kind", "code", "message"}, validation_rows));

  std::vector<std::vector<std::string>> group_rows;
  for (const auto& [attribute, values] : report.validation.attribute_groups) {
    for (const auto& [value, tally] : values) {
      group_rows.push_back({attribute, value, std::to_string(tally.subjects),
                            std::to_string(tally.images)});
    }
  }
  files.add("groups.csv",
            table_csv({"attribute", "value", "subjects", "images"}, group_rows));

  std::vector<std::vector<std::string>> accounting_rows;
  for (const auto& entry : report.accounting) {
    accounting_rows.push_back({entry.policy, std::to_string(entry.n_genuine),
                               std::to_string(entry.n_impostor_within),
                               std::to_string(entry.n_impostor_cross),
                               std::to_string(entry.excluded_subjects),
                               std::to_string(entry.dropped_missing_attribute)});
  }
  files.add("accounting.csv",
            table_csv({"policy", "n_genuine", "n_impostor_within", "n_impostor_cross",
                       "excluded_subjects", "dropped_missing_attribute"},
                      accounting_rows));

  std::vector<std::vector<std::string>> result_rows;
  std::vector<std::vector<std::string>> point_rows;
  std::vector<std::vector<std::string>> fixed_rows;
  for (const auto& cell : report.results) {
    result_rows.push_back({cell.policy, cell.group, cell.tier,
                           std::to_string(cell.n_genuine),
                           std::to_string(cell.n_impostor),
                           csv::format_double(cell.auc)});
    for (const auto& point : cell.operating_points) {
      point_rows.push_back({cell.policy, cell.group, cell.tier,
                            csv::format_double(point.far_target),
                            csv::format_double(point.threshold),
                            csv::format_double(point.achieved_far),
                            csv::format_double(point.vr)});
    }
    for (const auto& entry : cell.fixed_thresholds) {
      fixed_rows.push_back({cell.policy, cell.group, cell.tier,
                            csv::format_double(entry.t), csv::format_double(entry.far),
                            csv::format_double(entry.frr), csv::format_double(entry.vr)});
    }
  }
  files.add("results.csv",
            table_csv({"policy", "group", "tier", "n_genuine", "n_impostor", "auc"},
                      result_rows));
  files.add("operating_points.csv",
            table_csv({"policy", "group", "tier", "far_target", "threshold",
                       "achieved_far", "vr"},
                      point_rows));
  files.add("fixed_thresholds.csv",
            table_csv({"policy", "group", "tier", "t", "far", "frr", "vr"}, fixed_rows));

  std::vector<std::vector<std::string>> shift_rows;
  for (const auto& shift : report.shifts) {
    shift_rows.push_back({shift.policy, shift.tier, shift.group_a, shift.group_b,
                          csv::format_double(shift.far_target),
                          csv::format_double(shift.shift)});
  }
  files.add("shifts.csv",
            table_csv({"policy", "tier", "group_a", "group_b", "far_target", "shift"},
                      shift_rows));

  std::vector<std::vector<std::string>> gap_rows;
  for (const auto& gap : report.auc_gaps) {
    gap_rows.push_back({gap.policy, gap.tier, gap.group_a, gap.group_b,
                        csv::format_double(gap.gap)});
  }
  files.add("auc_gaps.csv",
            table_csv({"policy", "tier", "group_a", "group_b", "gap"}, gap_rows));

  std::vector<std::vector<std::string>> warning_rows;
  for (const auto& warning : report.warnings)
    warning_rows.push_back({warning.code, warning.message});
  files.add("warnings.csv", table_csv({"code", "message"}, warning_rows));
}

void add_report_files(FileSet& files, const AuditReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    files.add("report.json", report_to_json_text(report));
    return;
  }
  add_table_files(files, report);
  add_curve_files(files, report);
}

void add_manifest(FileSet& files) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& file : files.files()) {
    rows.push_back({file.name, std::to_string(file.content.size()),
                    hex64(fnv1a64(file.content))});
  }
  std::sort(rows.begin(), rows.end());
  files.add("manifest.csv", table_csv({"file", "bytes", "fnv1a64"}, rows));
}

std::vector<std::string> write_files(FileSet& files, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir), ec);
  if (ec)
    throw AuditError(Errc::IoError, "cannot create output directory: " + out_dir);
  std::vector<std::string> written;
  for (const auto& file : files.files()) {
    const fs::path path = fs::path(out_dir) / file.name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw AuditError(Errc::IoError, "cannot open output: " + path.string());
    out.write(file.content.data(),
              static_cast<std::streamsize>(file.content.size()));
    if (!out) throw AuditError(Errc::IoError, "cannot write output: " + path.string());
    written.push_back(file.name);
  }
  return written;
}

// (policy, group, tier) lookup over the report's result cells.
using CellIndex =
    std::map<std::tuple<std::string, std::string, std::string>, const ResultCell*>;

CellIndex index_cells(const AuditReport& report) {
  CellIndex index;
  for (const auto& cell : report.results)
    index[{cell.policy, cell.group, cell.tier}] = &cell;
  return index;
}

// Strata when the audit stratified, otherwise just the pooled label; the
// figure grouping mirrors the per-group curves of the source material.
std::vector<std::string> plot_groups(const AuditReport& report,
                                     const std::string& policy_label) {
  std::set<std::string> strata;
  for (const auto& cell : report.results) {
    if (cell.policy == policy_label && cell.group != kOverallGroup)
      strata.insert(cell.group);
  }
  if (strata.empty()) return {kOverallGroup};
  return {strata.begin(), strata.end()};
}

void add_figure_files(FileSet& files, const AuditArtifacts& artifacts) {
  const AuditReport& report = artifacts.report;
  const CellIndex cells = index_cells(report);
  RocPlotOptions roc_options;
  roc_options.palette = report.config.palette;
  roc_options.far_gridlines = report.config.far_targets;
  SeriesOptions series_options;
  series_options.palette = report.config.palette;

  std::vector<std::string> tier_labels;
  if (!report.config.tier_reference.empty())
    tier_labels = report.config.tier_spec.value_or(TierSpec{}).tier_names;

  for (const auto& policy : report.config.yoking_policies) {
    const std::string policy_label = policy.name();
    const std::string policy_slug = slugify(policy_label);
    const std::vector<std::string> groups = plot_groups(report, policy_label);

    std::vector<std::pair<std::string, RocCurve>> curves;
    for (const auto& group : groups) {
      const auto it = cells.find({policy_label, group, kAllTier});
      if (it != cells.end()) curves.emplace_back(group, it->second->roc);
    }
    if (!curves.empty())
      files.add("roc_" + policy_slug + ".svg", plot_roc(curves, roc_options));

    for (const auto& tier : tier_labels) {
      std::vector<std::pair<std::string, RocCurve>> tier_curves;
      for (const auto& group : groups) {
        const auto it = cells.find({policy_label, group, tier});
        if (it != cells.end()) tier_curves.emplace_back(group, it->second->roc);
      }
      if (!tier_curves.empty()) {
        files.add("roc_" + policy_slug + "_tier_" + slugify(tier) + ".svg",
                  plot_roc(tier_curves, roc_options));
      }
    }

    std::vector<std::pair<std::string, ThresholdFunction>> functions;
    for (const auto& group : groups) {
      const auto it = report.threshold_functions.find({policy_label, group});
      if (it != report.threshold_functions.end())
        functions.emplace_back(group, it->second);
    }
    if (!functions.empty()) {
      files.add("thresholds_" + policy_slug + ".svg",
                plot_threshold_functions(functions, series_options));
    }

    for (const auto& [key, distributions] : artifacts.scores) {
      if (key.first != policy_label) continue;
      if (distributions.first.empty() || distributions.second.empty()) continue;
      std::vector<double> marks;
      const auto it = cells.find({policy_label, key.second, kAllTier});
      if (it != cells.end()) {
        for (const auto& point : it->second->operating_points) {
          if (!point.unresolvable) marks.push_back(point.threshold);
        }
      }
      marks.insert(marks.end(), report.config.fixed_thresholds.begin(),
                   report.config.fixed_thresholds.end());
      std::sort(marks.begin(), marks.end());
      marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
      const std::string group_slug = slugify(key.second);
      files.add("hist_" + policy_slug + "_" + group_slug + ".svg",
                plot_histograms(distributions.first, distributions.second, marks,
                                series_options));
      std::ostringstream hist_csv;
      write_histogram_csv(hist_csv, distributions.first, distributions.second);
      files.add("hist_" + policy_slug + "_" + group_slug + ".csv", hist_csv.str());
    }
  }
}

}  // namespace

std::vector<std::string> emit_report(const AuditReport& report,
                                     const std::string& out_dir,
                                     ReportFormat format) {
  FileSet files;
  add_report_files(files, report, format);
  if (format == ReportFormat::CsvBundle) add_manifest(files);
  return write_files(files, out_dir);
}

std::vector<std::string> emit_audit_outputs(const AuditArtifacts& artifacts,
                                            const std::string& out_dir,
                                            ReportFormat format) {
  FileSet files;
  add_report_files(files, artifacts.report, format);
  if (format == ReportFormat::Json) add_curve_files(files, artifacts.report);
  add_figure_files(files, artifacts);
  if (format == ReportFormat::CsvBundle) add_manifest(files);
  return write_files(files, out_dir);
}

}  // namespace verigauge
