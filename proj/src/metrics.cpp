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

#include "verigauge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "verigauge/csv.hpp"
#include "verigauge/errors.hpp"

namespace verigauge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  return out;
}

void require_nonempty(std::span<const double> scores, const char* what) {
  if (scores.empty())
    throw AuditError(Errc::EmptyDistribution,
                     std::string(what) + " score set is empty");
}

}  // namespace

double far_at_threshold(std::span<const double> impostor_scores, double t) {
  require_nonempty(impostor_scores, "impostor");
  std::size_t accepted = 0;
  for (double s : impostor_scores)
    if (s >= t) ++accepted;
  return static_cast<double>(accepted) /
         static_cast<double>(impostor_scores.size());
}

double frr_at_threshold(std::span<const double> genuine_scores, double t) {
  require_nonempty(genuine_scores, "genuine");
  std::size_t rejected = 0;
  for (double s : genuine_scores)
    if (s < t) ++rejected;
  return static_cast<double>(rejected) /
         static_cast<double>(genuine_scores.size());
}

RocCurve roc_curve(std::span<const double> genuine_scores,
                   std::span<const double> impostor_scores) {
  require_nonempty(genuine_scores, "genuine");
  require_nonempty(impostor_scores, "impostor");

  const auto genuine = sorted_copy(genuine_scores);
  const auto impostor = sorted_copy(impostor_scores);
  std::vector<double> thresholds;
  thresholds.reserve(genuine.size() + impostor.size());
  std::merge(genuine.begin(), genuine.end(), impostor.begin(), impostor.end(),
             std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  RocCurve roc;
  roc.n_genuine = genuine.size();
  roc.n_impostor = impostor.size();
  roc.points.reserve(thresholds.size() + 2);
  const double ng = static_cast<double>(genuine.size());
  const double ni = static_cast<double>(impostor.size());

  roc.points.push_back(RocPoint{-kInf, 1.0, 1.0});
  std::size_t gi = 0, ii = 0;  // counts strictly below the current threshold
  for (double t : thresholds) {
    while (gi < genuine.size() && genuine[gi] < t) ++gi;
    while (ii < impostor.size() && impostor[ii] < t) ++ii;
    roc.points.push_back(
        RocPoint{t, static_cast<double>(impostor.size() - ii) / ni,
                 static_cast<double>(genuine.size() - gi) / ng});
  }
  roc.points.push_back(RocPoint{kInf, 0.0, 0.0});
  return roc;
}

double auc(const RocCurve& roc) {
  if (roc.points.size() < 2 || roc.n_genuine == 0 || roc.n_impostor == 0)
    throw AuditError(Errc::DomainError, "AUC of an invalid RocCurve");
  const double ng = static_cast<double>(roc.n_genuine);
  const double ni = static_cast<double>(roc.n_impostor);
  // Recover the integer accept counts behind each point and accumulate the
  // trapezoid exactly; the result is the tie-half-credit concordance count
  // over 2 * n_genuine * n_impostor without intermediate rounding.
  long long doubled = 0;
  for (std::size_t k = 0; k + 1 < roc.points.size(); ++k) {
    const long long i0 = std::llround(roc.points[k].far * ni);
    const long long i1 = std::llround(roc.points[k + 1].far * ni);
    const long long g0 = std::llround(roc.points[k].vr * ng);
    const long long g1 = std::llround(roc.points[k + 1].vr * ng);
    doubled += (i0 - i1) * (g0 + g1);
  }
  return static_cast<double>(doubled) / (2.0 * ng * ni);
}

ThresholdFunction threshold_function(std::span<const double> impostor_scores,
                                     const std::string& group_label) {
  require_nonempty(impostor_scores, "impostor");
  const auto impostor = sorted_copy(impostor_scores);
  const double ni = static_cast<double>(impostor.size());

  ThresholdFunction fn;
  fn.group_label = group_label;
  fn.points.push_back(ThresholdPoint{-kInf, 1.0});
  for (std::size_t i = 0; i < impostor.size(); ++i) {
    if (i > 0 && impostor[i] == impostor[i - 1]) continue;
    fn.points.push_back(ThresholdPoint{
        impostor[i], static_cast<double>(impostor.size() - i) / ni});
  }
  fn.points.push_back(ThresholdPoint{kInf, 0.0});
  return fn;
}

OperatingPoint threshold_for_far(std::span<const double> impostor_scores,
                                 double target) {
  require_nonempty(impostor_scores, "impostor");
  if (!(target > 0.0) || !(target <= 1.0))
    throw AuditError(Errc::DomainError,
                     "FAR target must lie in (0, 1], got " +
                         csv::format_double(target));
  const auto impostor = sorted_copy(impostor_scores);
  const double ni = static_cast<double>(impostor.size());
  // FAR is non-increasing in t, so the first (smallest) distinct score whose
  // FAR fits the target is the minimum realizable threshold.
  for (std::size_t i = 0; i < impostor.size(); ++i) {
    if (i > 0 && impostor[i] == impostor[i - 1]) continue;
    const double far = static_cast<double>(impostor.size() - i) / ni;
    if (far <= target) return OperatingPoint{impostor[i], far, false};
  }
  // Even the maximum score overshoots: target is below the 1/n floor.
  return OperatingPoint{kInf, 0.0, true};
}

VerificationPoint vr_at_far(std::span<const double> genuine_scores,
                            std::span<const double> impostor_scores,
                            double target) {
  require_nonempty(genuine_scores, "genuine");
  const OperatingPoint op = threshold_for_far(impostor_scores, target);
  VerificationPoint vp;
  vp.threshold = op.threshold;
  vp.achieved_far = op.achieved_far;
  vp.unresolvable = op.unresolvable;
  vp.vr = 1.0 - frr_at_threshold(genuine_scores, op.threshold);
  return vp;
}

double threshold_shift(std::span<const double> impostor_a,
                       std::span<const double> impostor_b, double target) {
  const OperatingPoint a = threshold_for_far(impostor_a, target);
  const OperatingPoint b = threshold_for_far(impostor_b, target);
  if (a.unresolvable || b.unresolvable)
    throw AuditError(Errc::DomainError,
                     "threshold shift undefined: FAR target " +
                         csv::format_double(target) +
                         " is below a group's empirical floor");
  return b.threshold - a.threshold;
}

std::map<std::string, GroupRates> fixed_threshold_disparity(
    const std::map<std::string, ScoredPairSet>& groups, double t) {
  if (!std::isfinite(t))
    throw AuditError(Errc::DomainError,
                     "fixed threshold must be finite, got " +
                         csv::format_double(t));
  if (groups.empty())
    throw AuditError(Errc::DomainError, "no groups to compare");
  std::map<std::string, GroupRates> rates;
  for (const auto& [label, scored] : groups) {
    GroupRates r;
    r.far = far_at_threshold(scored.impostor_scores(), t);
    r.frr = frr_at_threshold(scored.genuine_scores(), t);
    r.vr = 1.0 - r.frr;
    rates.emplace(label, r);
  }
  return rates;
}

double auc_gap(double auc_a, double auc_b) {
  if (!(auc_a >= 0.0 && auc_a <= 1.0) || !(auc_b >= 0.0 && auc_b <= 1.0))
    throw AuditError(Errc::DomainError, "AUC values must lie in [0, 1]");
  return auc_a - auc_b;
}

BiasStats compute_bias_stats(const std::map<std::string, ScoredPairSet>& groups,
                             std::span<const double> far_targets) {
  BiasStats stats;
  std::map<std::string, std::map<double, OperatingPoint>> ops;
  for (const auto& [label, scored] : groups) {
    const auto genuine = scored.genuine_scores();
    const auto impostor = scored.impostor_scores();
    GroupBias bias;
    bias.auc = auc(roc_curve(genuine, impostor));
    for (double target : far_targets) {
      const OperatingPoint op = threshold_for_far(impostor, target);
      ops[label][target] = op;
      bias.thresholds_at_far[target] = op.threshold;
      bias.vr_at_far[target] =
          op.unresolvable ? 0.0 : 1.0 - frr_at_threshold(genuine, op.threshold);
      if (op.unresolvable)
        stats.warnings.push_back(Finding{
            "UnresolvableFar",
            "group '" + label + "' cannot realize FAR target " +
                csv::format_double(target) + " with " +
                std::to_string(impostor.size()) + " impostor pairs"});
    }
    stats.per_group.emplace(label, std::move(bias));
  }
  for (const auto& [label_a, bias_a] : stats.per_group) {
    for (const auto& [label_b, bias_b] : stats.per_group) {
      if (label_a == label_b) continue;
      stats.auc_gaps[{label_a, label_b}] = bias_a.auc - bias_b.auc;
      for (double target : far_targets) {
        const OperatingPoint& a = ops[label_a][target];
        const OperatingPoint& b = ops[label_b][target];
        if (a.unresolvable || b.unresolvable) continue;
        stats.shifts[ShiftKey{label_a, label_b, target}] =
            b.threshold - a.threshold;
      }
    }
  }
  return stats;
}

double quantile_nearest_rank(std::span<const double> sorted_ascending,
                             double q) {
  if (sorted_ascending.empty())
    throw AuditError(Errc::EmptyDistribution, "quantile of an empty sample");
  const double n = static_cast<double>(sorted_ascending.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted_ascending.size());
  return sorted_ascending[rank - 1];
}

double fd_bin_width(std::span<const double> sample) {
  const auto sorted = sorted_copy(sample);
  const double iqr = quantile_nearest_rank(sorted, 0.75) -
                     quantile_nearest_rank(sorted, 0.25);
  return 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
}

Histogram build_histogram(std::span<const double> sample, double lo, double hi,
                          double bin_width) {
  if (!(bin_width > 0.0) || !(hi > lo))
    throw AuditError(Errc::DomainError, "histogram needs hi > lo and a "
                                        "positive bin width");
  Histogram hist;
  hist.lo = lo;
  hist.bin_width = bin_width;
  const auto bins =
      static_cast<std::size_t>(std::ceil((hi - lo) / bin_width));
  hist.counts.assign(std::max<std::size_t>(bins, 1), 0);
  for (double x : sample) {
    if (x < lo || x > hi) continue;
    auto idx = static_cast<std::size_t>((x - lo) / bin_width);
    idx = std::min(idx, hist.counts.size() - 1);
    ++hist.counts[idx];
    ++hist.n;
  }
  return hist;
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
  csv::write_record(out, {"threshold", "far", "vr"});
  for (const auto& p : roc.points)
    csv::write_record(out, {csv::format_double(p.threshold),
                            csv::format_double(p.far),
                            csv::format_double(p.vr)});
}

void write_threshold_function_csv(std::ostream& out,
                                  const ThresholdFunction& fn) {
  csv::write_record(out, {"threshold", "far"});
  for (const auto& p : fn.points)
    csv::write_record(out, {csv::format_double(p.threshold),
                            csv::format_double(p.far)});
}

namespace {

std::size_t count_from_min_rate(double min_positive) {
  if (!(min_positive > 0.0) || min_positive > 1.0) return 1;
  return static_cast<std::size_t>(std::llround(1.0 / min_positive));
}

}  // namespace

RocCurve read_roc_csv(std::istream& in) {
  auto header = csv::read_record(in);
  if (!header || *header != std::vector<std::string>{"threshold", "far", "vr"})
    throw AuditError(Errc::SchemaError,
                     "ROC CSV must start with header threshold,far,vr");
  RocCurve roc;
  double min_far = 1.0, min_vr = 1.0;
  std::size_t row = 1;
  while (auto record = csv::read_record(in)) {
    ++row;
    if (record->size() != 3)
      throw AuditError(Errc::SchemaError,
                       "row " + std::to_string(row) + " has " +
                           std::to_string(record->size()) + " fields");
    RocPoint p;
    p.threshold = csv::parse_double((*record)[0]);
    p.far = csv::parse_double((*record)[1]);
    p.vr = csv::parse_double((*record)[2]);
    if (p.far > 0.0) min_far = std::min(min_far, p.far);
    if (p.vr > 0.0) min_vr = std::min(min_vr, p.vr);
    roc.points.push_back(p);
  }
  if (roc.points.size() < 2)
    throw AuditError(Errc::SchemaError, "ROC CSV holds fewer than 2 points");
  roc.n_impostor = count_from_min_rate(min_far);
  roc.n_genuine = count_from_min_rate(min_vr);
  return roc;
}

ThresholdFunction read_threshold_function_csv(std::istream& in,
                                              const std::string& group_label) {
  auto header = csv::read_record(in);
  if (!header || *header != std::vector<std::string>{"threshold", "far"})
    throw AuditError(Errc::SchemaError,
                     "threshold CSV must start with header threshold,far");
  ThresholdFunction fn;
  fn.group_label = group_label;
  std::size_t row = 1;
  while (auto record = csv::read_record(in)) {
    ++row;
    if (record->size() != 2)
      throw AuditError(Errc::SchemaError,
                       "row " + std::to_string(row) + " has " +
                           std::to_string(record->size()) + " fields");
    fn.points.push_back(ThresholdPoint{csv::parse_double((*record)[0]),
                                       csv::parse_double((*record)[1])});
  }
  if (fn.points.empty())
    throw AuditError(Errc::SchemaError, "threshold CSV holds no points");
  return fn;
}

}  // namespace verigauge
