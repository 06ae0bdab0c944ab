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

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "verigauge/metrics.hpp"

namespace verigauge {

// Self-contained SVG emission. Every coordinate in an emitted document is
// produced by the small public helpers below, so tests (and the plot
// subcommand) can recompute a figure's geometry from the matching CSV
// export and compare strings exactly.

/// Pixel corners of the data area on the fixed 720x480 canvas; y0 is the
/// top edge (SVG y grows downward).
struct PlotFrame {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
};

PlotFrame plot_frame();

/// Linear lerp of `value` from [lo, hi] onto [px0, px1]; pass px0 > px1 to
/// flip an axis.
double map_linear(double value, double lo, double hi, double px0, double px1);

/// Fixed two-decimal rendering used for every emitted coordinate.
std::string svg_coord(double value);

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Log-axis FAR floor for ROC plots: max(1e-6, 1 / (2 * n_impostor)) taking
/// the largest impostor count across curves, so every curve's smallest
/// positive FAR stays above the clip.
double roc_far_floor(
    const std::vector<std::pair<std::string, RocCurve>>& curves);

/// Same floor rule for threshold functions, realized as half the smallest
/// positive FAR across functions (the points alone carry no impostor
/// count, and that smallest FAR is 1/n when the maximum score is unique).
double threshold_far_floor(
    const std::vector<std::pair<std::string, ThresholdFunction>>& functions);

/// Shared linear threshold axis: the finite threshold span across all
/// functions, padded 2% per side.
AxisRange threshold_axis_range(
    const std::vector<std::pair<std::string, ThresholdFunction>>& functions);

/// The exact polyline `points` string plot_roc emits for one curve:
/// x = log10(FAR) clipped at the floor, y = VR linear.
std::string roc_polyline_points(const RocCurve& curve, double far_floor);

/// The exact step-rendered polyline plot_threshold_functions emits: FAR
/// holds its level up to each threshold and drops just after it; sentinels
/// become the frame edges and FAR 0 clips at the floor.
std::string threshold_polyline_points(const ThresholdFunction& fn,
                                      AxisRange x_range, double far_floor);

/// Shared display binning: Freedman-Diaconis width on the pooled sample
/// over [min, max], with a fallback of (hi-lo)/ceil(sqrt(n)) when the IQR
/// is zero and a single unit-wide bin when the pool is constant.
struct HistogramLayout {
  double lo = 0.0;
  double hi = 0.0;
  double bin_width = 0.0;
  std::size_t bins = 0;
};

HistogramLayout histogram_layout(std::span<const double> genuine,
                                 std::span<const double> impostor);

/// Colorblind-safe series colors; index 0 is teal and index 1 orange, the
/// conventional two-group pairing.
const std::vector<std::string>& default_palette();

struct SeriesOptions {
  /// Empty means default_palette(); series index wraps around.
  std::vector<std::string> palette;
};

struct RocPlotOptions : SeriesOptions {
  /// Dotted vertical gridlines, conventionally the operating FAR targets.
  std::vector<double> far_gridlines{1e-4, 1e-3};
};

std::string plot_roc(const std::vector<std::pair<std::string, RocCurve>>& curves,
                     const RocPlotOptions& options = {});

std::string plot_threshold_functions(
    const std::vector<std::pair<std::string, ThresholdFunction>>& functions,
    const SeriesOptions& options = {});

/// Overlaid density-normalized histograms with a dotted vertical line per
/// finite threshold inside the sample range.
std::string plot_histograms(std::span<const double> genuine_scores,
                            std::span<const double> impostor_scores,
                            std::span<const double> thresholds,
                            const SeriesOptions& options = {});

/// Export of the shared display binning: `bin_lo,bin_hi,genuine_density,
/// impostor_density`, the numbers behind plot_histograms.
void write_histogram_csv(std::ostream& out, std::span<const double> genuine,
                         std::span<const double> impostor);

}  // namespace verigauge
