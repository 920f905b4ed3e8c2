#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lobeforge/analysis/trace_csv.hpp"
#include "lobeforge/core/error.hpp"

namespace lobeforge {

struct BoxplotSeries {
  std::string label;
  std::vector<double> values;
};

struct ForceStrokeSeries {
  std::string label;
  std::vector<TracePoint> trace;
  bool has_first_transition = false;
  double first_transition_stroke = 0.0;
  bool has_second_transition = false;
  double second_transition_stroke = 0.0;
};

namespace detail {

// Linear-interpolation quantile on a sorted sample (type 7, the default of
// most statistics environments).
inline double quantile_r7(const std::vector<double>& sorted, double p) {
  double h = (sorted.size() - 1) * p;
  size_t lo = static_cast<size_t>(std::floor(h));
  size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct PlotFrame {
  double width = 640.0;
  double height = 420.0;
  double left = 64.0;
  double right = 616.0;
  double top = 40.0;
  double bottom = 372.0;
  double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;

  double x(double v) const {
    return left + (v - min_x) / (max_x - min_x) * (right - left);
  }
  double y(double v) const {
    return bottom - (v - min_y) / (max_y - min_y) * (bottom - top);
  }
};

inline void pad_range(double& lo, double& hi) {
  if (hi <= lo) {
    lo -= 1.0;
    hi += 1.0;
    return;
  }
  double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

inline void open_svg(std::string& svg, const PlotFrame& f, const std::string& title) {
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(f.width) +
         "\" height=\"" + svg_num(f.height) + "\" viewBox=\"0 0 " + svg_num(f.width) +
         " " + svg_num(f.height) + "\">\n";
  svg += "<rect width=\"" + svg_num(f.width) + "\" height=\"" + svg_num(f.height) +
         "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + svg_num(f.width / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" +
         title + "</text>\n";
  svg += "<rect x=\"" + svg_num(f.left) + "\" y=\"" + svg_num(f.top) + "\" width=\"" +
         svg_num(f.right - f.left) + "\" height=\"" + svg_num(f.bottom - f.top) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
}

inline void y_axis(std::string& svg, const PlotFrame& f, const std::string& label) {
  for (int i = 0; i <= 5; ++i) {
    double v = f.min_y + (f.max_y - f.min_y) * i / 5.0;
    double yy = f.y(v);
    svg += "<line x1=\"" + svg_num(f.left - 4) + "\" y1=\"" + svg_num(yy) + "\" x2=\"" +
           svg_num(f.left) + "\" y2=\"" + svg_num(yy) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + svg_num(f.left - 8) + "\" y=\"" + svg_num(yy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           tick_label(v) + "</text>\n";
  }
  svg += "<text x=\"16\" y=\"" + svg_num((f.top + f.bottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " +
         svg_num((f.top + f.bottom) / 2) + ")\">" + label + "</text>\n";
}

inline const char* series_color(size_t index) {
  static const char* palette[] = {"#1b6ca8", "#c4472f", "#3d8c40", "#8a5fa8",
                                  "#b08a1e", "#457b86", "#9c4a6e", "#5c5c5c"};
  return palette[index % 8];
}

}  // namespace detail

// Box-and-whisker chart, one box per labelled series: median line,
// interquartile box, whiskers to the farthest points within 1.5 IQR, and
// dots beyond. Output is a pure function of the input, so repeated runs
// are byte-identical.
inline std::string boxplot_svg(const std::vector<BoxplotSeries>& series,
                               const std::string& title, const std::string& y_label) {
  require(!series.empty(), ErrorCode::EmptyData, "no series to plot");
  detail::PlotFrame f;
  f.min_y = series[0].values.empty() ? 0.0 : series[0].values[0];
  f.max_y = f.min_y;
  for (const auto& s : series) {
    require(!s.values.empty(), ErrorCode::EmptyData,
            "series '" + s.label + "' has no values");
    for (double v : s.values) {
      f.min_y = std::min(f.min_y, v);
      f.max_y = std::max(f.max_y, v);
    }
  }
  detail::pad_range(f.min_y, f.max_y);
  f.min_x = 0.0;
  f.max_x = static_cast<double>(series.size());

  std::string svg;
  detail::open_svg(svg, f, title);
  detail::y_axis(svg, f, y_label);

  for (size_t s = 0; s < series.size(); ++s) {
    std::vector<double> sorted = series[s].values;
    std::sort(sorted.begin(), sorted.end());
    double q1 = detail::quantile_r7(sorted, 0.25);
    double q2 = detail::quantile_r7(sorted, 0.50);
    double q3 = detail::quantile_r7(sorted, 0.75);
    double iqr = q3 - q1;
    double lo_fence = q1 - 1.5 * iqr;
    double hi_fence = q3 + 1.5 * iqr;
    double whisker_lo = q1, whisker_hi = q3;
    for (double v : sorted) {
      if (v >= lo_fence) {
        whisker_lo = v;
        break;
      }
    }
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
      if (*it <= hi_fence) {
        whisker_hi = *it;
        break;
      }
    }

    double cx = f.x(s + 0.5);
    double half = 0.3 * (f.right - f.left) / series.size();
    const char* color = detail::series_color(s);
    auto hline = [&](double v, double shrink) {
      svg += "<line x1=\"" + detail::svg_num(cx - half * shrink) + "\" y1=\"" +
             detail::svg_num(f.y(v)) + "\" x2=\"" + detail::svg_num(cx + half * shrink) +
             "\" y2=\"" + detail::svg_num(f.y(v)) + "\" stroke=\"" + color + "\"/>\n";
    };
    svg += "<line x1=\"" + detail::svg_num(cx) + "\" y1=\"" +
           detail::svg_num(f.y(whisker_lo)) + "\" x2=\"" + detail::svg_num(cx) +
           "\" y2=\"" + detail::svg_num(f.y(q1)) + "\" stroke=\"" + color + "\"/>\n";
    svg += "<line x1=\"" + detail::svg_num(cx) + "\" y1=\"" + detail::svg_num(f.y(q3)) +
           "\" x2=\"" + detail::svg_num(cx) + "\" y2=\"" +
           detail::svg_num(f.y(whisker_hi)) + "\" stroke=\"" + color + "\"/>\n";
    hline(whisker_lo, 0.5);
    hline(whisker_hi, 0.5);
    svg += "<rect x=\"" + detail::svg_num(cx - half) + "\" y=\"" +
           detail::svg_num(f.y(q3)) + "\" width=\"" + detail::svg_num(2 * half) +
           "\" height=\"" + detail::svg_num(f.y(q1) - f.y(q3)) + "\" fill=\"" + color +
           "\" fill-opacity=\"0.25\" stroke=\"" + color + "\"/>\n";
    hline(q2, 1.0);
    for (double v : sorted) {
      if (v < lo_fence || v > hi_fence)
        svg += "<circle cx=\"" + detail::svg_num(cx) + "\" cy=\"" +
               detail::svg_num(f.y(v)) + "\" r=\"2.50\" fill=\"" + color + "\"/>\n";
    }
    svg += "<text x=\"" + detail::svg_num(cx) + "\" y=\"" + detail::svg_num(f.bottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           series[s].label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// Force against stroke for one or more recorded traces, with optional
// markers at the first and second force transitions. Deterministic for the
// same inputs.
inline std::string force_stroke_svg(const std::vector<ForceStrokeSeries>& series,
                                    const std::string& title) {
  require(!series.empty(), ErrorCode::EmptyData, "no series to plot");
  detail::PlotFrame f;
  bool first = true;
  for (const auto& s : series) {
    require(!s.trace.empty(), ErrorCode::EmptyData,
            "series '" + s.label + "' has no samples");
    for (const auto& p : s.trace) {
      if (first) {
        f.min_x = f.max_x = p.stroke_mm;
        f.min_y = f.max_y = p.force_n;
        first = false;
      }
      f.min_x = std::min(f.min_x, p.stroke_mm);
      f.max_x = std::max(f.max_x, p.stroke_mm);
      f.min_y = std::min(f.min_y, p.force_n);
      f.max_y = std::max(f.max_y, p.force_n);
    }
  }
  detail::pad_range(f.min_x, f.max_x);
  detail::pad_range(f.min_y, f.max_y);

  std::string svg;
  detail::open_svg(svg, f, title);
  detail::y_axis(svg, f, "force [N]");
  for (int i = 0; i <= 5; ++i) {
    double v = f.min_x + (f.max_x - f.min_x) * i / 5.0;
    double xx = f.x(v);
    svg += "<line x1=\"" + detail::svg_num(xx) + "\" y1=\"" + detail::svg_num(f.bottom) +
           "\" x2=\"" + detail::svg_num(xx) + "\" y2=\"" + detail::svg_num(f.bottom + 4) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::svg_num(xx) + "\" y=\"" + detail::svg_num(f.bottom + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::tick_label(v) + "</text>\n";
  }
  svg += "<text x=\"" + detail::svg_num((f.left + f.right) / 2) + "\" y=\"" +
         detail::svg_num(f.height - 8) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">stroke "
         "[mm]</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = detail::series_color(s);
    std::string points;
    for (const auto& p : series[s].trace) {
      if (!points.empty()) points += ' ';
      points += detail::svg_num(f.x(p.stroke_mm)) + "," + detail::svg_num(f.y(p.force_n));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"" +
           points + "\"/>\n";
    auto marker = [&](double stroke, const char* tag) {
      double xx = f.x(stroke);
      svg += "<line x1=\"" + detail::svg_num(xx) + "\" y1=\"" + detail::svg_num(f.top) +
             "\" x2=\"" + detail::svg_num(xx) + "\" y2=\"" + detail::svg_num(f.bottom) +
             "\" stroke=\"" + color + "\" stroke-dasharray=\"4 3\"/>\n";
      svg += "<text x=\"" + detail::svg_num(xx + 3) + "\" y=\"" +
             detail::svg_num(f.top + 12) +
             "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" +
             tag + "</text>\n";
    };
    if (series[s].has_first_transition) marker(series[s].first_transition_stroke, "X1");
    if (series[s].has_second_transition) marker(series[s].second_transition_stroke, "X2");
    svg += "<text x=\"" + detail::svg_num(f.right - 6) + "\" y=\"" +
           detail::svg_num(f.top + 16 + 14 * static_cast<double>(s)) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" +
           color + "\">" + series[s].label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace lobeforge
