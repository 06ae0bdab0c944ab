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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "verigauge/errors.hpp"
#include "verigauge/ingest.hpp"
#include "verigauge/metrics.hpp"
#include "verigauge/pairing.hpp"
#include "verigauge/partition.hpp"
#include "verigauge/scoring.hpp"
#include "verigauge/types.hpp"

namespace verigauge {

inline constexpr const char* kToolkitVersion = "1.0.0";

// Group label "overall" (the pooled row every audit carries) and tier label
// "all" (the untiered row) are reserved; configs and datasets colliding
// with them are rejected.
inline constexpr const char* kOverallGroup = "overall";
inline constexpr const char* kAllTier = "all";

struct AuditConfig {
  std::string metadata_path;
  /// Exactly one of embeddings_path / scores_path / scored_pairs_path must
  /// be set.
  std::string embeddings_path;
  /// Defaults by extension: ".csv" reads the CSV layout, anything else the
  /// packed binary layout.
  std::optional<EmbeddingFormat> embeddings_format;
  /// Score table (`probe_id,gallery_id,score`) covering every pair the
  /// metadata enumerates under each policy.
  std::string scores_path;
  /// Labeled scored-pair CSV; the audited pair universe is the file itself,
  /// with yoking applied as a filter. Fits score samples that do not cover
  /// the full cross product, e.g. a simulated corpus.
  std::string scored_pairs_path;
  std::string metric = "cosine";
  std::vector<YokingPolicy> yoking_policies{YokingPolicy{}};
  /// Empty: no stratification; only the pooled "overall" rows are emitted.
  std::string stratify_attribute;
  std::vector<double> far_targets{1e-4, 1e-3};
  std::vector<double> fixed_thresholds;
  /// "" = no tiering; "self" = tier on the audited scores; otherwise a
  /// scored-pair CSV whose pairs cover the audited pairs.
  std::string tier_reference;
  std::optional<TierSpec> tier_spec;
  std::optional<std::uint64_t> sample_seed;
  std::optional<std::uint64_t> max_genuine_pairs;
  std::optional<std::uint64_t> max_impostor_pairs;
  /// Optional plot color override, one CSS color per stratum index.
  std::vector<std::string> palette;

  void validate() const;
};

/// Strict JSON codec mirroring the scenario codec: unknown fields raise
/// SchemaError, malformed JSON FormatError, invariant violations
/// ConfigError. Rates accept either JSON numbers or 17-digit decimal
/// strings, so an echoed config reloads exactly.
AuditConfig audit_config_from_json_text(const std::string& text);
std::string audit_config_to_json_text(const AuditConfig& config);
AuditConfig load_audit_config(const std::string& path);

struct OperatingPointRow {
  double far_target = 0.0;
  double threshold = 0.0;
  double achieved_far = 0.0;
  double vr = 0.0;
  bool unresolvable = false;
};

struct FixedThresholdRow {
  double t = 0.0;
  double far = 0.0;
  double frr = 0.0;
  double vr = 0.0;
};

/// One (policy, group, tier) metric cell. Sample sizes ride along with
/// every metric; no number is reported without them.
struct ResultCell {
  std::string policy;
  std::string group;
  std::string tier;
  std::size_t n_genuine = 0;
  std::size_t n_impostor = 0;
  double auc = 0.0;
  std::vector<OperatingPointRow> operating_points;
  std::vector<FixedThresholdRow> fixed_thresholds;
  RocCurve roc;
};

struct ShiftRow {
  std::string policy;
  std::string tier;
  std::string group_a;
  std::string group_b;
  double far_target = 0.0;
  double shift = 0.0;
};

struct GapRow {
  std::string policy;
  std::string tier;
  std::string group_a;
  std::string group_b;
  double gap = 0.0;
};

/// Pair bookkeeping per yoking policy, including the cross-group impostor
/// bucket that stratification sets aside.
struct PairAccounting {
  std::string policy;
  std::size_t n_genuine = 0;
  std::size_t n_impostor_within = 0;
  std::size_t n_impostor_cross = 0;
  std::size_t excluded_subjects = 0;
  std::size_t dropped_missing_attribute = 0;
};

struct AuditReport {
  std::string version;
  AuditConfig config;
  ValidationReport validation;
  std::vector<PairAccounting> accounting;
  std::vector<ResultCell> results;
  std::vector<ShiftRow> shifts;
  std::vector<GapRow> auc_gaps;
  std::vector<Finding> warnings;
  /// Per (policy, group) FAR-vs-threshold functions at tier "all".
  std::map<std::pair<std::string, std::string>, ThresholdFunction>
      threshold_functions;
};

/// Raised when dataset validation blocks the audit; carries the full
/// ValidationReport for diagnostics.
class ValidationError : public AuditError {
 public:
  explicit ValidationError(ValidationReport report);

  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

AuditReport run_audit(const AuditConfig& config);

/// run_audit plus the per-(policy, group) score distributions behind the
/// histogram figures.
struct AuditArtifacts {
  AuditReport report;
  std::map<std::pair<std::string, std::string>,
           std::pair<std::vector<double>, std::vector<double>>>
      scores;
};

AuditArtifacts run_audit_full(const AuditConfig& config);

enum class ReportFormat { Json, CsvBundle };

ReportFormat report_format_from_name(std::string_view name);

/// The report document: decimal strings carry every score and rate, keys
/// are sorted, and two runs over identical inputs emit identical bytes.
std::string report_to_json_text(const AuditReport& report);

/// json: report.json. csv-bundle: one CSV per table, per-cell ROC and
/// per-group threshold-function CSVs, the echoed config, and manifest.csv
/// with an FNV-1a64 digest per file. Returns the filenames written,
/// relative to out_dir.
std::vector<std::string> emit_report(const AuditReport& report,
                                     const std::string& out_dir,
                                     ReportFormat format);

/// Everything `audit` writes: emit_report plus curve, threshold, and
/// histogram CSVs and the SVG figures; in csv-bundle mode the manifest
/// covers all of it.
std::vector<std::string> emit_audit_outputs(const AuditArtifacts& artifacts,
                                            const std::string& out_dir,
                                            ReportFormat format);

/// FNV-1a 64-bit content digest used by the bundle manifest.
std::uint64_t fnv1a64(std::string_view bytes);

/// Filesystem-safe label: characters outside [A-Za-z0-9_-] become '_'.
std::string slugify(const std::string& label);

}  // namespace verigauge
