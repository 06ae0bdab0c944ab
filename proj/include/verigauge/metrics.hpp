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

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "verigauge/scoring.hpp"
#include "verigauge/types.hpp"

namespace verigauge {

// Accept rule everywhere: a pair is accepted when score >= t. Thresholds are
// always realizable observed scores or the +/-infinity sentinels; no
// interpolation anywhere in this module.

/// Fraction of impostor scores accepted at t. Empty input: EmptyDistribution.
double far_at_threshold(std::span<const double> impostor_scores, double t);

/// Fraction of genuine scores rejected (score < t). Empty input:
/// EmptyDistribution.
double frr_at_threshold(std::span<const double> genuine_scores, double t);

inline double vr_at_threshold(std::span<const double> genuine_scores,
                              double t) {
  return 1.0 - frr_at_threshold(genuine_scores, t);
}

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;
  double vr = 0.0;
};

/// Empirical ROC sampled at every distinct score plus sentinels. Points are
/// sorted by threshold ascending; far and vr are non-increasing along the
/// curve, from (-inf, 1, 1) down to (+inf, 0, 0).
struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t n_genuine = 0;
  std::size_t n_impostor = 0;
};

RocCurve roc_curve(std::span<const double> genuine_scores,
                   std::span<const double> impostor_scores);

/// Trapezoidal area of vr over far. Equals the concordance statistic
/// P(genuine > impostor) + 1/2 P(tie) exactly: ties earn half credit.
double auc(const RocCurve& roc);

struct ThresholdPoint {
  double threshold = 0.0;
  double far = 0.0;
};

/// FAR as a step function of threshold, sampled at every distinct impostor
/// score plus sentinels: far(-inf) = 1, far(+inf) = 0, non-increasing.
struct ThresholdFunction {
  std::vector<ThresholdPoint> points;
  std::string group_label;
};

ThresholdFunction threshold_function(std::span<const double> impostor_scores,
                                     const std::string& group_label);

/// A calibrated threshold. When the target sits below the empirical floor
/// 1/n_impostor, threshold is the +inf sentinel, achieved_far is 0, and
/// unresolvable is set; callers surface this as an UnresolvableFar warning
/// instead of extrapolating.
struct OperatingPoint {
  double threshold = 0.0;
  double achieved_far = 0.0;
  bool unresolvable = false;
};

/// Minimum candidate threshold (distinct impostor scores plus +inf) whose
/// FAR is <= target. Requires 0 < target <= 1 (DomainError) and a nonempty
/// impostor set (EmptyDistribution).
OperatingPoint threshold_for_far(std::span<const double> impostor_scores,
                                 double target);

struct VerificationPoint {
  double threshold = 0.0;
  double vr = 0.0;
  double achieved_far = 0.0;
  bool unresolvable = false;
};

/// Verification rate at the threshold calibrated for `target`; vr is
/// 1 - frr at that threshold (0 when unresolvable).
VerificationPoint vr_at_far(std::span<const double> genuine_scores,
                            std::span<const double> impostor_scores,
                            double target);

/// threshold_for_far(B, target) - threshold_for_far(A, target). Throws
/// DomainError when either group cannot realize the target.
double threshold_shift(std::span<const double> impostor_a,
                       std::span<const double> impostor_b, double target);

struct GroupRates {
  double far = 0.0;
  double frr = 0.0;
  double vr = 0.0;
};

/// Per-group error rates at one shared finite threshold.
std::map<std::string, GroupRates> fixed_threshold_disparity(
    const std::map<std::string, ScoredPairSet>& groups, double t);

/// auc_a - auc_b; both inputs must lie in [0, 1].
double auc_gap(double auc_a, double auc_b);

struct GroupBias {
  double auc = 0.0;
  std::map<double, double> thresholds_at_far;
  std::map<double, double> vr_at_far;
};

struct ShiftKey {
  std::string group_a;
  std::string group_b;
  double far_target = 0.0;

  auto operator<=>(const ShiftKey&) const = default;
};

/// Cross-group summary: per-group AUC and operating points, pairwise
/// threshold shifts at each achievable target, and pairwise AUC gaps
/// (gap(A,B) = -gap(B,A)). Unachievable shift entries are skipped and
/// reported as UnresolvableFar warnings.
struct BiasStats {
  std::map<std::string, GroupBias> per_group;
  std::map<ShiftKey, double> shifts;
  std::map<std::pair<std::string, std::string>, double> auc_gaps;
  std::vector<Finding> warnings;
};

BiasStats compute_bias_stats(const std::map<std::string, ScoredPairSet>& groups,
                             std::span<const double> far_targets);

/// Nearest-rank quantile of an ascending-sorted sample: element at rank
/// ceil(q * n), clamped to [1, n]. Empty input: EmptyDistribution.
double quantile_nearest_rank(std::span<const double> sorted_ascending,
                             double q);

/// Freedman-Diaconis bin width, 2 * IQR / cbrt(n), with nearest-rank IQR.
/// Returns 0 when the IQR is 0; display code must fall back then.
double fd_bin_width(std::span<const double> sample);

/// Fixed-width counting histogram over [lo, hi]; values at hi land in the
/// last bin. Display-only helper behind report figures.
struct Histogram {
  double lo = 0.0;
  double bin_width = 0.0;
  std::vector<std::size_t> counts;
  std::size_t n = 0;
};

Histogram build_histogram(std::span<const double> sample, double lo, double hi,
                          double bin_width);

/// Export: `threshold,far,vr` rows with `-inf`/`+inf` sentinel rendering.
void write_roc_csv(std::ostream& out, const RocCurve& roc);
/// Export: `threshold,far` rows with sentinel rendering.
void write_threshold_function_csv(std::ostream& out,
                                  const ThresholdFunction& fn);

/// Inverse of write_roc_csv for re-rendering. The counts behind the curve
/// are not stored in the CSV, so n_genuine / n_impostor are reconstructed
/// from the smallest positive rates; that lower bound only feeds the plot
/// floor.
RocCurve read_roc_csv(std::istream& in);
ThresholdFunction read_threshold_function_csv(std::istream& in,
                                              const std::string& group_label);

}  // namespace verigauge
