#pragma once

#include <cmath>
#include <optional>

#include "lobeforge/protocol/indentation.hpp"

namespace lobeforge {

// Characteristic strokes of a force trace: X1 is first contact (force
// exceeds the threshold), X2 is the stroke of the force peak that precedes
// the first relative drop of drop_fraction, or the snap stroke if the snap
// came first. A trace that never drops and carries no snap marker gets
// X2 = last stroke with no_snap set.
struct TransitionPoints {
  double x1 = 0.0;
  double x2 = 0.0;
  bool no_snap = false;
};

inline void validate_trace(const IndentationTrace& trace) {
  require(!trace.samples.empty(), ErrorCode::EmptyData, "trace has no samples");
  for (size_t i = 1; i < trace.samples.size(); ++i)
    require(trace.samples[i].stroke_mm > trace.samples[i - 1].stroke_mm,
            ErrorCode::NonMonotoneStroke, "stroke values must increase strictly");
}

inline TransitionPoints detect_transition_points(const IndentationTrace& trace,
                                                 double force_threshold = 0.01,
                                                 double drop_fraction = 0.2) {
  validate_trace(trace);
  require(force_threshold >= 0.0 && drop_fraction > 0.0 && drop_fraction < 1.0,
          ErrorCode::RangeError, "invalid transition thresholds");

  std::optional<double> x1;
  for (const auto& s : trace.samples) {
    if (s.force_n > force_threshold) {
      x1 = s.stroke_mm;
      break;
    }
  }
  require(x1.has_value(), ErrorCode::NoTransition,
          "force never exceeded the contact threshold");

  std::optional<double> drop_peak_stroke;
  double peak = -std::numeric_limits<double>::infinity();
  double peak_stroke = 0.0;
  for (const auto& s : trace.samples) {
    if (s.stroke_mm < *x1) continue;
    if (s.force_n > peak) {
      peak = s.force_n;
      peak_stroke = s.stroke_mm;
    } else if (peak > 0.0 && s.force_n <= (1.0 - drop_fraction) * peak) {
      drop_peak_stroke = peak_stroke;
      break;
    }
  }
  std::optional<double> x2 = drop_peak_stroke;
  if (trace.snap_detected &&
      (!x2.has_value() || trace.snap_stroke < *x2))
    x2 = trace.snap_stroke;

  TransitionPoints points;
  points.x1 = *x1;
  if (x2.has_value()) {
    points.x2 = std::max(*x2, *x1);
  } else {
    points.x2 = trace.samples.back().stroke_mm;
    points.no_snap = true;
  }
  return points;
}

// Trapezoidal integral of force over stroke between two sample strokes,
// in mJ (mm * N). x1 and x2 must coincide with recorded samples.
inline double compute_work(const IndentationTrace& trace, double x1, double x2) {
  validate_trace(trace);
  require(x1 < x2, ErrorCode::RangeError, "work interval is empty or reversed");
  int i1 = -1, i2 = -1;
  for (size_t i = 0; i < trace.samples.size(); ++i) {
    if (std::abs(trace.samples[i].stroke_mm - x1) < 1e-9) i1 = static_cast<int>(i);
    if (std::abs(trace.samples[i].stroke_mm - x2) < 1e-9) i2 = static_cast<int>(i);
  }
  require(i1 >= 0 && i2 >= 0, ErrorCode::RangeError,
          "work bounds must coincide with trace samples");
  double work = 0.0;
  for (int i = i1; i < i2; ++i) {
    const TraceSample& a = trace.samples[i];
    const TraceSample& b = trace.samples[i + 1];
    work += 0.5 * (a.force_n + b.force_n) * (b.stroke_mm - a.stroke_mm);
  }
  return work;
}

inline double peak_force(const IndentationTrace& trace) {
  validate_trace(trace);
  double peak = 0.0;
  for (const auto& s : trace.samples) peak = std::max(peak, s.force_n);
  return peak;
}

}  // namespace lobeforge
