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

#include "verigauge/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "verigauge/csv.hpp"
#include "verigauge/errors.hpp"
#include "verigauge/ingest.hpp"
#include "verigauge/metrics.hpp"
#include "verigauge/pairing.hpp"
#include "verigauge/partition.hpp"
#include "verigauge/plots.hpp"
#include "verigauge/report.hpp"
#include "verigauge/scoring.hpp"
#include "verigauge/synthetic.hpp"
#include "verigauge/types.hpp"

namespace verigauge {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty())
      throw AuditError(Errc::ConfigError, "empty entry in list: " + text);
    out.push_back(item);
  }
  if (out.empty()) throw AuditError(Errc::ConfigError, "empty list");
  return out;
}

std::vector<double> parse_rate_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(csv::parse_double(item));
  return out;
}

void print_warnings(const AuditReport& report) {
  for (const auto& finding : report.validation.warnings)
    std::cerr << "warning: " << finding.code << ": " << finding.message << "\n";
  for (const auto& finding : report.warnings)
    std::cerr << "warning: " << finding.code << ": " << finding.message << "\n";
}

struct AuditArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> yoke;
  std::string stratify;
  std::string far_list;
  std::string threshold_list;
  std::string metric;
  std::uint64_t seed = 0;
  std::string format = "json";
  CLI::Option* yoke_opt = nullptr;
  CLI::Option* stratify_opt = nullptr;
  CLI::Option* far_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* metric_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

int run_audit_cmd(const AuditArgs& args) {
  AuditConfig config = load_audit_config(args.config_path);
  if (args.yoke_opt->count() > 0) {
    config.yoking_policies.clear();
    for (const auto& spec : args.yoke) {
      YokingPolicy policy;
      if (spec != "none") policy.constrained_attributes = split_list(spec);
      config.yoking_policies.push_back(std::move(policy));
    }
  }
  if (args.stratify_opt->count() > 0)
    config.stratify_attribute = args.stratify == "none" ? "" : args.stratify;
  if (args.far_opt->count() > 0) config.far_targets = parse_rate_list(args.far_list);
  if (args.threshold_opt->count() > 0)
    config.fixed_thresholds = parse_rate_list(args.threshold_list);
  if (args.metric_opt->count() > 0) config.metric = args.metric;
  if (args.seed_opt->count() > 0) config.sample_seed = args.seed;
  config.validate();
  const ReportFormat format = report_format_from_name(args.format);

  const AuditArtifacts artifacts = run_audit_full(config);
  print_warnings(artifacts.report);
  const auto files = emit_audit_outputs(artifacts, args.out_dir, format);
  for (const auto& name : files)
    std::cout << (fs::path(args.out_dir) / name).generic_string() << "\n";
  return 0;
}

struct SimulateArgs {
  std::string scenario_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string embeddings_format = "packed";
  CLI::Option* seed_opt = nullptr;
};

int run_simulate_cmd(const SimulateArgs& args) {
  ScenarioSpec spec = load_scenario(args.scenario_path);
  if (args.seed_opt->count() > 0) spec.seed = args.seed;

  const SyntheticScores scores = generate_scores(spec);
  ScoredPairSet merged;
  merged.metric_name = "synthetic";
  for (const auto& [label, set] : scores.per_group) {
    merged.genuine.insert(merged.genuine.end(), set.genuine.begin(),
                          set.genuine.end());
    merged.impostor.insert(merged.impostor.end(), set.impostor.begin(),
                           set.impostor.end());
  }
  merged.impostor.insert(merged.impostor.end(), scores.cross_group.impostor.begin(),
                         scores.cross_group.impostor.end());

  const bool with_embeddings =
      std::all_of(spec.groups.begin(), spec.groups.end(),
                  [](const GroupSpec& g) { return g.embedding_spec.has_value(); });
  std::error_code ec;
  fs::create_directories(fs::path(args.out_dir), ec);
  if (ec)
    throw AuditError(Errc::IoError, "cannot create output directory: " + args.out_dir);

  std::vector<std::string> written;
  Dataset dataset;
  if (with_embeddings) {
    SyntheticPopulation population = generate_embeddings(spec);
    dataset = std::move(population.dataset);
    const EmbeddingFormat format =
        embedding_format_from_name(args.embeddings_format);
    const std::string name =
        format == EmbeddingFormat::Csv ? "embeddings.csv" : "embeddings.vge";
    save_embeddings((fs::path(args.out_dir) / name).string(),
                    population.embeddings, format);
    written.push_back(name);
  } else {
    // Scores-only scenario: synthesize the metadata the score ids refer to.
    dataset.attribute_names = {"race"};
    for (const auto& group : spec.groups) {
      for (std::uint64_t subject = 0; subject < group.n_subjects; ++subject) {
        for (std::uint64_t image = 0; image < group.images_per_subject; ++image) {
          ImageRecord record;
          record.image_id = make_image_id(group.group_label, subject, image);
          record.subject_id = make_subject_id(group.group_label, subject);
          record.attributes["race"] = group.group_label;
          dataset.records.push_back(std::move(record));
        }
      }
    }
  }
  save_metadata((fs::path(args.out_dir) / "metadata.csv").string(), dataset);
  written.push_back("metadata.csv");
  // scores.csv feeds `audit` (unordered pair -> score); scored_pairs.csv is
  // the labeled export that `partition` and `thresholds` consume directly.
  ScoreTable table;
  for (const auto& entry : merged.genuine) table.entries[entry.pair] = entry.score;
  for (const auto& entry : merged.impostor) table.entries[entry.pair] = entry.score;
  save_scores((fs::path(args.out_dir) / "scores.csv").string(), table);
  written.push_back("scores.csv");
  save_scored_pairs_csv((fs::path(args.out_dir) / "scored_pairs.csv").string(),
                        merged);
  written.push_back("scored_pairs.csv");
  {
    std::ofstream out(fs::path(args.out_dir) / "scenario.json",
                      std::ios::binary | std::ios::trunc);
    if (!out) throw AuditError(Errc::IoError, "cannot write scenario echo");
    out << scenario_to_json_text(spec);
  }
  written.push_back("scenario.json");

  std::sort(written.begin(), written.end());
  for (const auto& name : written)
    std::cout << (fs::path(args.out_dir) / name).generic_string() << "\n";
  return 0;
}

struct PartitionArgs {
  std::string scores_path;
  std::string out_path = "-";
  std::string tiers;
  std::string edges;
  std::string metadata_path;
  std::string attribute;
  bool summary = false;
  CLI::Option* tiers_opt = nullptr;
  CLI::Option* edges_opt = nullptr;
};

int run_partition_cmd(const PartitionArgs& args) {
  const ScoredPairSet scored = load_scored_pairs_csv(args.scores_path);
  TierSpec spec;
  if (args.tiers_opt->count() > 0) spec.tier_names = split_list(args.tiers);
  if (args.edges_opt->count() > 0) spec.quantile_edges = parse_rate_list(args.edges);
  spec.validate();
  const TieredPairs tiers = assign_difficulty_tiers(scored, spec);

  std::ostringstream body;
  if (args.summary) {
    if (args.metadata_path.empty())
      throw AuditError(Errc::ConfigError, "--summary requires --metadata");
    const Dataset dataset = load_metadata(args.metadata_path);
    body << render_tier_summary(tier_summary(tiers, dataset, args.attribute));
  } else {
    write_tier_csv(body, scored, tiers);
  }
  if (args.out_path == "-") {
    std::cout << body.str();
  } else {
    std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw AuditError(Errc::IoError, "cannot open output: " + args.out_path);
    out << body.str();
  }
  return 0;
}

struct ThresholdsArgs {
  std::string scores_path;
  std::string far_list = "1e-4,1e-3";
  std::string metadata_path;
  std::string stratify;
};

int run_thresholds_cmd(const ThresholdsArgs& args) {
  const ScoredPairSet scored = load_scored_pairs_csv(args.scores_path);
  const std::vector<double> targets = parse_rate_list(args.far_list);
  for (double target : targets) {
    if (!(target > 0.0) || target > 1.0)
      throw AuditError(Errc::ConfigError, "FAR targets must lie in (0, 1]");
  }

  std::map<std::string, ScoredPairSet> groups;
  if (!args.stratify.empty()) {
    if (args.metadata_path.empty())
      throw AuditError(Errc::ConfigError, "--stratify requires --metadata");
    const Dataset dataset = load_metadata(args.metadata_path);
    PairSet pairs;
    pairs.genuine.reserve(scored.genuine.size());
    pairs.impostor.reserve(scored.impostor.size());
    for (const auto& entry : scored.genuine) pairs.genuine.push_back(entry.pair);
    for (const auto& entry : scored.impostor) pairs.impostor.push_back(entry.pair);
    std::unordered_map<ImagePair, double, ImagePairHash> score_of;
    score_of.reserve(pairs.genuine.size() + pairs.impostor.size());
    for (const auto& entry : scored.genuine) score_of.emplace(entry.pair, entry.score);
    for (const auto& entry : scored.impostor) score_of.emplace(entry.pair, entry.score);
    const StratifiedPairs stratified = stratify_pairs(pairs, dataset, args.stratify);
    for (const auto& [value, subset] : stratified.groups) {
      ScoredPairSet& group = groups[value];
      for (const auto& pair : subset.genuine)
        group.genuine.push_back({pair, score_of.at(pair)});
      for (const auto& pair : subset.impostor)
        group.impostor.push_back({pair, score_of.at(pair)});
    }
  } else {
    groups[kOverallGroup] = scored;
  }

  std::ostream& out = std::cout;
  csv::write_record(out, {"group", "far_target", "threshold", "achieved_far", "vr"});
  for (const auto& [label, group] : groups) {
    if (group.genuine.empty() || group.impostor.empty()) {
      std::cerr << "warning: EmptyCell: group " << label
                << " lacks genuine or impostor pairs; skipped\n";
      continue;
    }
    const std::vector<double> genuine = group.genuine_scores();
    const std::vector<double> impostor = group.impostor_scores();
    for (double target : targets) {
      const VerificationPoint point = vr_at_far(genuine, impostor, target);
      if (point.unresolvable) {
        std::cerr << "warning: UnresolvableFar: group " << label << " at "
                  << csv::format_double(target) << "; threshold reported as +inf\n";
      }
      csv::write_record(out, {label, csv::format_double(target),
                              csv::format_double(point.threshold),
                              csv::format_double(point.achieved_far),
                              csv::format_double(point.vr)});
    }
  }
  return 0;
}

struct PlotArgs {
  std::string kind;
  std::string out_path;
  std::vector<std::string> inputs;
  std::vector<std::string> labels;
  std::string gridlines = "1e-4,1e-3";
  std::string palette;
  CLI::Option* palette_opt = nullptr;
};

int run_plot_cmd(const PlotArgs& args) {
  if (args.labels.size() > args.inputs.size())
    throw AuditError(Errc::ConfigError, "more labels than input files");
  auto label_for = [&args](std::size_t index) {
    if (index < args.labels.size()) return args.labels[index];
    return fs::path(args.inputs[index]).stem().string();
  };

  std::string svg;
  if (args.kind == "roc") {
    std::vector<std::pair<std::string, RocCurve>> curves;
    for (std::size_t i = 0; i < args.inputs.size(); ++i) {
      std::ifstream in(args.inputs[i], std::ios::binary);
      if (!in)
        throw AuditError(Errc::IoError, "cannot open input: " + args.inputs[i]);
      curves.emplace_back(label_for(i), read_roc_csv(in));
    }
    RocPlotOptions options;
    options.far_gridlines = parse_rate_list(args.gridlines);
    if (args.palette_opt->count() > 0) options.palette = split_list(args.palette);
    svg = plot_roc(curves, options);
  } else if (args.kind == "thresholds") {
    std::vector<std::pair<std::string, ThresholdFunction>> functions;
    for (std::size_t i = 0; i < args.inputs.size(); ++i) {
      std::ifstream in(args.inputs[i], std::ios::binary);
      if (!in)
        throw AuditError(Errc::IoError, "cannot open input: " + args.inputs[i]);
      functions.emplace_back(label_for(i),
                             read_threshold_function_csv(in, label_for(i)));
    }
    SeriesOptions options;
    if (args.palette_opt->count() > 0) options.palette = split_list(args.palette);
    svg = plot_threshold_functions(functions, options);
  } else {
    throw AuditError(Errc::ConfigError,
                     "unknown plot kind: " + args.kind + " (use roc or thresholds)");
  }

  std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw AuditError(Errc::IoError, "cannot open output: " + args.out_path);
  out << svg;
  if (!out) throw AuditError(Errc::IoError, "cannot write output: " + args.out_path);
  std::cout << args.out_path << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"demographic bias audit toolkit for 1:1 verification systems"};
  app.require_subcommand(1);

  AuditArgs audit_args;
  CLI::App* audit = app.add_subcommand("audit", "run a full audit from a config");
  audit->add_option("--config", audit_args.config_path, "audit config JSON")
      ->required();
  audit->add_option("--out", audit_args.out_dir, "output directory")->required();
  audit_args.yoke_opt = audit->add_option(
      "--yoke", audit_args.yoke,
      "impostor yoking policy, comma-joined attributes or 'none'; repeatable, "
      "replaces the config's policies");
  audit_args.stratify_opt = audit->add_option(
      "--stratify", audit_args.stratify, "stratification attribute, 'none' to clear");
  audit_args.far_opt =
      audit->add_option("--far", audit_args.far_list, "comma-separated FAR targets");
  audit_args.threshold_opt = audit->add_option(
      "--threshold", audit_args.threshold_list, "comma-separated fixed thresholds");
  audit_args.metric_opt =
      audit->add_option("--metric", audit_args.metric, "similarity metric name");
  audit_args.seed_opt =
      audit->add_option("--seed", audit_args.seed, "subsampling seed");
  audit->add_option("--format", audit_args.format, "report format: json or csv")
      ->check(CLI::IsMember({"json", "csv", "csv-bundle"}));

  SimulateArgs simulate_args;
  CLI::App* simulate =
      app.add_subcommand("simulate", "generate a synthetic corpus from a scenario");
  simulate->add_option("--scenario", simulate_args.scenario_path, "scenario JSON")
      ->required();
  simulate->add_option("--out", simulate_args.out_dir, "output directory")
      ->required();
  simulate_args.seed_opt =
      simulate->add_option("--seed", simulate_args.seed, "override the scenario seed");
  simulate->add_option("--embeddings-format", simulate_args.embeddings_format,
                       "embedding output format: packed or csv")
      ->check(CLI::IsMember({"packed", "csv"}));

  PartitionArgs partition_args;
  CLI::App* partition =
      app.add_subcommand("partition", "assign difficulty tiers from scored pairs");
  partition->add_option("scores", partition_args.scores_path, "scored-pair CSV")
      ->required();
  partition->add_option("--out", partition_args.out_path,
                        "output path, '-' for stdout");
  partition_args.tiers_opt = partition->add_option(
      "--tiers", partition_args.tiers, "comma-separated tier names, easiest first");
  partition_args.edges_opt = partition->add_option(
      "--edges", partition_args.edges, "comma-separated quantile edges in (0,1)");
  partition->add_flag("--summary", partition_args.summary,
                      "print per-tier identity counts instead of the assignment");
  partition->add_option("--metadata", partition_args.metadata_path,
                        "metadata CSV (required by --summary)");
  partition->add_option("--attribute", partition_args.attribute,
                        "attribute to break the summary down by");

  ThresholdsArgs thresholds_args;
  CLI::App* thresholds = app.add_subcommand(
      "thresholds", "per-group calibrated thresholds for FAR targets");
  thresholds->add_option("scores", thresholds_args.scores_path, "scored-pair CSV")
      ->required();
  thresholds->add_option("--far", thresholds_args.far_list,
                         "comma-separated FAR targets");
  thresholds->add_option("--metadata", thresholds_args.metadata_path,
                         "metadata CSV (required by --stratify)");
  thresholds->add_option("--stratify", thresholds_args.stratify,
                         "attribute to group by");

  PlotArgs plot_args;
  CLI::App* plot = app.add_subcommand("plot", "re-render SVG figures from CSV exports");
  plot->add_option("kind", plot_args.kind, "figure kind: roc or thresholds")
      ->required();
  plot->add_option("--out", plot_args.out_path, "output SVG path")->required();
  plot->add_option("inputs", plot_args.inputs, "input CSV files")
      ->required()
      ->expected(-1);
  plot->add_option("--label", plot_args.labels,
                   "curve label, one per input; defaults to the file stem");
  plot->add_option("--gridlines", plot_args.gridlines,
                   "comma-separated FAR gridlines for roc plots");
  plot_args.palette_opt =
      plot->add_option("--palette", plot_args.palette, "comma-separated CSS colors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (audit->parsed()) return run_audit_cmd(audit_args);
    if (simulate->parsed()) return run_simulate_cmd(simulate_args);
    if (partition->parsed()) return run_partition_cmd(partition_args);
    if (thresholds->parsed()) return run_thresholds_cmd(thresholds_args);
    if (plot->parsed()) return run_plot_cmd(plot_args);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& finding : e.report().errors)
      std::cerr << "  " << finding.code << ": " << finding.message << "\n";
    return 1;
  } catch (const AuditError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace verigauge
