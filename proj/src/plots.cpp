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

#include "verigauge/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "verigauge/csv.hpp"
#include "verigauge/errors.hpp"

namespace verigauge {

namespace {

constexpr double kCanvasW = 720.0;
constexpr double kCanvasH = 480.0;

std::string fmt(const char* format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), format, value);
  return buffer;
}

std::string sci(double value) { return fmt("%.0e", value); }

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

const std::string& color_at(const SeriesOptions& options, std::size_t index) {
  const auto& palette =
      options.palette.empty() ? default_palette() : options.palette;
  return palette[index % palette.size()];
}

void open_document(std::ostringstream& svg) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 720 480\" "
         "width=\"720\" height=\"480\" font-family=\"sans-serif\" "
         "font-size=\"12\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"720\" height=\"480\" "
         "fill=\"#ffffff\"/>\n";
}

void draw_frame(std::ostringstream& svg) {
  const PlotFrame f = plot_frame();
  svg << "<rect x=\"" << svg_coord(f.x0) << "\" y=\"" << svg_coord(f.y0)
      << "\" width=\"" << svg_coord(f.x1 - f.x0) << "\" height=\""
      << svg_coord(f.y1 - f.y0)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
}

void x_tick(std::ostringstream& svg, double px, const std::string& label) {
  const PlotFrame f = plot_frame();
  svg << "<line x1=\"" << svg_coord(px) << "\" y1=\"" << svg_coord(f.y1)
      << "\" x2=\"" << svg_coord(px) << "\" y2=\"" << svg_coord(f.y1 + 4)
      << "\" stroke=\"#333333\"/>\n";
  svg << "<text x=\"" << svg_coord(px) << "\" y=\"" << svg_coord(f.y1 + 18)
      << "\" text-anchor=\"middle\">" << xml_escape(label) << "</text>\n";
}

void y_tick(std::ostringstream& svg, double py, const std::string& label) {
  const PlotFrame f = plot_frame();
  svg << "<line x1=\"" << svg_coord(f.x0 - 4) << "\" y1=\"" << svg_coord(py)
      << "\" x2=\"" << svg_coord(f.x0) << "\" y2=\"" << svg_coord(py)
      << "\" stroke=\"#333333\"/>\n";
  svg << "<text x=\"" << svg_coord(f.x0 - 8) << "\" y=\"" << svg_coord(py + 4)
      << "\" text-anchor=\"end\">" << xml_escape(label) << "</text>\n";
}

void axis_titles(std::ostringstream& svg, const std::string& x_title,
                 const std::string& y_title) {
  const PlotFrame f = plot_frame();
  svg << "<text x=\"" << svg_coord((f.x0 + f.x1) / 2) << "\" y=\""
      << svg_coord(kCanvasH - 10) << "\" text-anchor=\"middle\">"
      << xml_escape(x_title) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << svg_coord((f.y0 + f.y1) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << svg_coord((f.y0 + f.y1) / 2) << ")\">" << xml_escape(y_title)
      << "</text>\n";
}

void legend(std::ostringstream& svg, const std::vector<std::string>& labels,
            const SeriesOptions& options, double x, double y) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double row = y + 16.0 * static_cast<double>(i);
    svg << "<line x1=\"" << svg_coord(x) << "\" y1=\"" << svg_coord(row - 4)
        << "\" x2=\"" << svg_coord(x + 22) << "\" y2=\"" << svg_coord(row - 4)
        << "\" stroke=\"" << color_at(options, i)
        << "\" stroke-width=\"2.5\"/>\n";
    svg << "<text x=\"" << svg_coord(x + 28) << "\" y=\"" << svg_coord(row)
        << "\">" << xml_escape(labels[i]) << "</text>\n";
  }
}

void dotted_vertical(std::ostringstream& svg, double px) {
  const PlotFrame f = plot_frame();
  svg << "<line x1=\"" << svg_coord(px) << "\" y1=\"" << svg_coord(f.y0)
      << "\" x2=\"" << svg_coord(px) << "\" y2=\"" << svg_coord(f.y1)
      << "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
}

double log_x(double far, double floor) {
  const PlotFrame f = plot_frame();
  const double clamped = std::clamp(far, floor, 1.0);
  return map_linear(std::log10(clamped), std::log10(floor), 0.0, f.x0, f.x1);
}

double log_y(double far, double floor) {
  const PlotFrame f = plot_frame();
  const double clamped = std::clamp(far, floor, 1.0);
  return map_linear(std::log10(clamped), std::log10(floor), 0.0, f.y1, f.y0);
}

// Decade tick values from the floor up to 1.
std::vector<double> decades(double floor) {
  std::vector<double> out;
  for (int k = static_cast<int>(std::ceil(std::log10(floor))); k <= 0; ++k)
    out.push_back(std::pow(10.0, k));
  return out;
}

}  // namespace

PlotFrame plot_frame() { return PlotFrame{70.0, 20.0, 700.0, 430.0}; }

double map_linear(double value, double lo, double hi, double px0, double px1) {
  if (hi == lo) return (px0 + px1) / 2.0;
  return px0 + (value - lo) / (hi - lo) * (px1 - px0);
}

std::string svg_coord(double value) { return fmt("%.2f", value); }

const std::vector<std::string>& default_palette() {
  static const std::vector<std::string> palette{
      "#008080", "#e69f00", "#0072b2", "#cc79a7",
      "#009e73", "#d55e00", "#56b4e9", "#867bd1"};
  return palette;
}

double roc_far_floor(
    const std::vector<std::pair<std::string, RocCurve>>& curves) {
  if (curves.empty())
    throw AuditError(Errc::DomainError, "ROC plot needs at least one curve");
  std::size_t n_max = 1;
  for (const auto& [label, curve] : curves)
    n_max = std::max(n_max, curve.n_impostor);
  return std::max(1e-6, 1.0 / (2.0 * static_cast<double>(n_max)));
}

double threshold_far_floor(
    const std::vector<std::pair<std::string, ThresholdFunction>>& functions) {
  if (functions.empty())
    throw AuditError(Errc::DomainError,
                     "threshold plot needs at least one function");
  double min_positive = 1.0;
  for (const auto& [label, fn] : functions)
    for (const auto& p : fn.points)
      if (p.far > 0.0) min_positive = std::min(min_positive, p.far);
  return std::max(1e-6, min_positive / 2.0);
}

AxisRange threshold_axis_range(
    const std::vector<std::pair<std::string, ThresholdFunction>>& functions) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& [label, fn] : functions)
    for (const auto& p : fn.points)
      if (std::isfinite(p.threshold)) {
        lo = std::min(lo, p.threshold);
        hi = std::max(hi, p.threshold);
      }
  if (!(lo <= hi))
    throw AuditError(Errc::DomainError,
                     "threshold plot needs a finite threshold point");
  const double pad = hi > lo ? 0.02 * (hi - lo) : 0.5;
  return AxisRange{lo - pad, hi + pad};
}

std::string roc_polyline_points(const RocCurve& curve, double far_floor) {
  const PlotFrame f = plot_frame();
  std::string out;
  for (const auto& p : curve.points) {
    if (!out.empty()) out.push_back(' ');
    out += svg_coord(log_x(p.far, far_floor));
    out.push_back(',');
    out += svg_coord(map_linear(p.vr, 0.0, 1.0, f.y1, f.y0));
  }
  return out;
}

std::string threshold_polyline_points(const ThresholdFunction& fn,
                                      AxisRange x_range, double far_floor) {
  const PlotFrame f = plot_frame();
  std::vector<ThresholdPoint> finite;
  for (const auto& p : fn.points)
    if (std::isfinite(p.threshold)) finite.push_back(p);
  if (finite.empty())
    throw AuditError(Errc::DomainError,
                     "threshold function has no finite points");

  const auto X = [&](double t) {
    return map_linear(t, x_range.lo, x_range.hi, f.x0, f.x1);
  };
  std::string out;
  const auto append = [&](double px, double py) {
    if (!out.empty()) out.push_back(' ');
    out += svg_coord(px);
    out.push_back(',');
    out += svg_coord(py);
  };
  // FAR holds each level on (t_prev, t_k], so the drop is drawn at t_k,
  // from the frame's left edge (the -inf sentinel) to its right (+inf).
  append(f.x0, log_y(finite.front().far, far_floor));
  for (std::size_t k = 0; k < finite.size(); ++k) {
    const double next_far =
        k + 1 < finite.size() ? finite[k + 1].far : 0.0;
    append(X(finite[k].threshold), log_y(finite[k].far, far_floor));
    append(X(finite[k].threshold), log_y(next_far, far_floor));
  }
  append(f.x1, log_y(0.0, far_floor));
  return out;
}

HistogramLayout histogram_layout(std::span<const double> genuine,
                                 std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty())
    throw AuditError(Errc::EmptyDistribution,
                     "histogram needs both score distributions nonempty");
  std::vector<double> pooled;
  pooled.reserve(genuine.size() + impostor.size());
  pooled.insert(pooled.end(), genuine.begin(), genuine.end());
  pooled.insert(pooled.end(), impostor.begin(), impostor.end());

  HistogramLayout layout;
  layout.lo = *std::min_element(pooled.begin(), pooled.end());
  layout.hi = *std::max_element(pooled.begin(), pooled.end());
  layout.bin_width = fd_bin_width(pooled);
  if (!(layout.bin_width > 0.0)) {
    if (layout.hi > layout.lo) {
      layout.bin_width =
          (layout.hi - layout.lo) /
          std::ceil(std::sqrt(static_cast<double>(pooled.size())));
    } else {
      layout.lo -= 0.5;
      layout.hi += 0.5;
      layout.bin_width = 1.0;
    }
  }
  layout.bins = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil((layout.hi - layout.lo) / layout.bin_width)));
  return layout;
}

std::string plot_roc(const std::vector<std::pair<std::string, RocCurve>>& curves,
                     const RocPlotOptions& options) {
  const double floor = roc_far_floor(curves);
  const PlotFrame f = plot_frame();
  std::ostringstream svg;
  open_document(svg);

  for (double target : options.far_gridlines)
    if (target >= floor && target <= 1.0)
      dotted_vertical(svg, log_x(target, floor));

  for (double tick : decades(floor)) x_tick(svg, log_x(tick, floor), sci(tick));
  for (int i = 0; i <= 5; ++i) {
    const double vr = static_cast<double>(i) / 5.0;
    y_tick(svg, map_linear(vr, 0.0, 1.0, f.y1, f.y0), fmt("%.1f", vr));
  }

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    labels.push_back(curves[i].first);
    svg << "<polyline fill=\"none\" stroke=\"" << color_at(options, i)
        << "\" stroke-width=\"1.8\" points=\""
        << roc_polyline_points(curves[i].second, floor) << "\"/>\n";
  }
  draw_frame(svg);
  legend(svg, labels, options, f.x1 - 170,
         f.y1 - 16.0 * static_cast<double>(labels.size()) - 10);
  axis_titles(svg, "false accept rate (log scale)", "verification rate");
  svg << "<text x=\"" << svg_coord(f.x0) << "\" y=\"14\">FAR clipped at "
      << sci(floor) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string plot_threshold_functions(
    const std::vector<std::pair<std::string, ThresholdFunction>>& functions,
    const SeriesOptions& options) {
  const double floor = threshold_far_floor(functions);
  const AxisRange range = threshold_axis_range(functions);
  const PlotFrame f = plot_frame();
  std::ostringstream svg;
  open_document(svg);

  for (int i = 0; i <= 4; ++i) {
    const double t =
        range.lo + (range.hi - range.lo) * static_cast<double>(i) / 4.0;
    x_tick(svg, map_linear(t, range.lo, range.hi, f.x0, f.x1),
           fmt("%.3g", t));
  }
  for (double tick : decades(floor)) y_tick(svg, log_y(tick, floor), sci(tick));

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < functions.size(); ++i) {
    labels.push_back(functions[i].first);
    svg << "<polyline fill=\"none\" stroke=\"" << color_at(options, i)
        << "\" stroke-width=\"1.8\" points=\""
        << threshold_polyline_points(functions[i].second, range, floor)
        << "\"/>\n";
  }
  draw_frame(svg);
  legend(svg, labels, options, f.x1 - 170, f.y0 + 20);
  axis_titles(svg, "decision threshold (score)",
              "false accept rate (log scale)");
  svg << "<text x=\"" << svg_coord(f.x0) << "\" y=\"14\">FAR clipped at "
      << sci(floor) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string plot_histograms(std::span<const double> genuine_scores,
                            std::span<const double> impostor_scores,
                            std::span<const double> thresholds,
                            const SeriesOptions& options) {
  const HistogramLayout layout =
      histogram_layout(genuine_scores, impostor_scores);
  const PlotFrame f = plot_frame();
  const Histogram genuine = build_histogram(genuine_scores, layout.lo,
                                            layout.hi, layout.bin_width);
  const Histogram impostor = build_histogram(impostor_scores, layout.lo,
                                             layout.hi, layout.bin_width);

  const auto density = [&](const Histogram& hist, std::size_t bin) {
    return static_cast<double>(hist.counts[bin]) /
           (static_cast<double>(hist.n) * layout.bin_width);
  };
  double max_density = 0.0;
  for (std::size_t bin = 0; bin < layout.bins; ++bin)
    max_density = std::max({max_density, density(genuine, bin),
                            density(impostor, bin)});
  if (max_density == 0.0) max_density = 1.0;

  const auto X = [&](double value) {
    return map_linear(value, layout.lo, layout.hi, f.x0, f.x1);
  };
  const auto Y = [&](double d) {
    return map_linear(d, 0.0, max_density, f.y1, f.y0);
  };

  std::ostringstream svg;
  open_document(svg);
  const Histogram* hists[2] = {&genuine, &impostor};
  for (std::size_t series = 0; series < 2; ++series) {
    for (std::size_t bin = 0; bin < layout.bins; ++bin) {
      if (hists[series]->counts[bin] == 0) continue;
      const double lo_edge =
          layout.lo + static_cast<double>(bin) * layout.bin_width;
      const double hi_edge =
          layout.lo + static_cast<double>(bin + 1) * layout.bin_width;
      const double top = Y(density(*hists[series], bin));
      svg << "<rect x=\"" << svg_coord(X(lo_edge)) << "\" y=\""
          << svg_coord(top) << "\" width=\""
          << svg_coord(X(hi_edge) - X(lo_edge)) << "\" height=\""
          << svg_coord(f.y1 - top) << "\" fill=\"" << color_at(options, series)
          << "\" fill-opacity=\"0.45\"/>\n";
    }
  }
  for (double t : thresholds)
    if (std::isfinite(t) && t >= layout.lo && t <= layout.hi)
      dotted_vertical(svg, X(t));

  for (int i = 0; i <= 4; ++i) {
    const double v =
        layout.lo + (layout.hi - layout.lo) * static_cast<double>(i) / 4.0;
    x_tick(svg, X(v), fmt("%.3g", v));
    const double d = max_density * static_cast<double>(i) / 4.0;
    y_tick(svg, Y(d), fmt("%.3g", d));
  }
  draw_frame(svg);
  legend(svg, {"genuine", "impostor"}, options, f.x1 - 170, f.y0 + 20);
  axis_titles(svg, "similarity score", "density");
  svg << "</svg>\n";
  return svg.str();
}

void write_histogram_csv(std::ostream& out, std::span<const double> genuine,
                         std::span<const double> impostor) {
  const HistogramLayout layout = histogram_layout(genuine, impostor);
  const Histogram hg =
      build_histogram(genuine, layout.lo, layout.hi, layout.bin_width);
  const Histogram hi =
      build_histogram(impostor, layout.lo, layout.hi, layout.bin_width);
  csv::write_record(out,
                    {"bin_lo", "bin_hi", "genuine_density", "impostor_density"});
  for (std::size_t bin = 0; bin < layout.bins; ++bin) {
    const double lo_edge =
        layout.lo + static_cast<double>(bin) * layout.bin_width;
    const double hi_edge =
        layout.lo + static_cast<double>(bin + 1) * layout.bin_width;
    const double dg = static_cast<double>(hg.counts[bin]) /
                      (static_cast<double>(hg.n) * layout.bin_width);
    const double di = static_cast<double>(hi.counts[bin]) /
                      (static_cast<double>(hi.n) * layout.bin_width);
    csv::write_record(out, {csv::format_double(lo_edge),
                            csv::format_double(hi_edge),
                            csv::format_double(dg), csv::format_double(di)});
  }
}

}  // namespace verigauge
