#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "lobeforge/core/error.hpp"
#include "lobeforge/geometry/surface_patch.hpp"

namespace lobeforge {

// Rectangular clamp tab protruding beyond the hinge edge, centered on it.
struct TabSpec {
  double width = 12.0;  // mm along the hinge
  double depth = 5.0;   // mm beyond the hinge edge
};

// Planar sketch outline of a lobe. Points run counter-clockwise and form a
// closed polygon; the hinge polyline is the inclusive index range
// [hinge_begin, hinge_end] along the outline, the rest is the free edge.
struct LobeContour {
  std::vector<Eigen::Vector2d> points;
  int hinge_begin = 0;
  int hinge_end = 0;
  int apex_index = 0;
  std::optional<TabSpec> tab;
  std::optional<double> rib_offset;  // band width from the hinge edge, mm
};

inline void validate_contour(const LobeContour& contour) {
  int n = static_cast<int>(contour.points.size());
  require(n >= 3, ErrorCode::QualityFailure, "contour needs at least 3 points");
  require(polygon_signed_area(contour.points) > 0.0, ErrorCode::QualityFailure,
          "contour must be counter-clockwise");
  require(!polygon_self_intersects(contour.points), ErrorCode::QualityFailure,
          "contour self-intersects");
  require(contour.hinge_begin >= 0 && contour.hinge_begin < n, ErrorCode::RangeError,
          "hinge_begin out of range");
  require(contour.hinge_end >= 0 && contour.hinge_end < n, ErrorCode::RangeError,
          "hinge_end out of range");
  require(contour.hinge_begin != contour.hinge_end, ErrorCode::MissingTags,
          "hinge segment is empty");
  require(contour.apex_index >= 0 && contour.apex_index < n, ErrorCode::RangeError,
          "apex index out of range");
  if (contour.rib_offset)
    require(*contour.rib_offset > 0.0, ErrorCode::RangeError, "rib offset must be positive");
  if (contour.tab)
    require(contour.tab->width > 0.0 && contour.tab->depth > 0.0, ErrorCode::RangeError,
            "tab dimensions must be positive");
}

// Default leaf-shaped outline: straight hinge edge along the bottom and a
// half-elliptic free edge rising to the apex. Centered on the origin so the
// projection target can also be centered.
inline LobeContour make_lobe_contour(double span = 40.0, double height = 25.0,
                                     int hinge_points = 16, int arc_points = 32) {
  require(span > 0.0 && height > 0.0, ErrorCode::RangeError,
          "contour dimensions must be positive");
  LobeContour c;
  double y0 = -height / 2.0;
  for (int i = 0; i < hinge_points; ++i) {
    double x = -span / 2.0 + span * i / (hinge_points - 1);
    c.points.emplace_back(x, y0);
  }
  // Half-ellipse from the right hinge corner over the apex to the left one,
  // skipping both corner duplicates.
  for (int i = 1; i < arc_points; ++i) {
    double phi = M_PI * i / arc_points;
    c.points.emplace_back(span / 2.0 * std::cos(phi), y0 + height * std::sin(phi));
  }
  c.hinge_begin = 0;
  c.hinge_end = hinge_points - 1;
  c.apex_index = hinge_points - 1 + (arc_points + 1) / 2;
  return c;
}

// Splices the clamp tab into the outline: the central part of the hinge edge
// is replaced by a rectangular bump protruding away from the lobe interior.
// All bump points belong to the hinge polyline afterwards.
inline LobeContour apply_tab(const LobeContour& contour) {
  if (!contour.tab) return contour;
  validate_contour(contour);
  require(contour.hinge_begin < contour.hinge_end, ErrorCode::RangeError,
          "tab insertion expects an unwrapped hinge range");
  const TabSpec& tab = *contour.tab;
  Eigen::Vector2d h0 = contour.points[contour.hinge_begin];
  Eigen::Vector2d h1 = contour.points[contour.hinge_end];
  Eigen::Vector2d dir = (h1 - h0).normalized();
  Eigen::Vector2d outward(dir.y(), -dir.x());  // away from the CCW interior
  Eigen::Vector2d mid = 0.5 * (h0 + h1);
  double hinge_len = (h1 - h0).norm();
  require(tab.width < hinge_len, ErrorCode::RangeError, "tab wider than hinge edge");
  Eigen::Vector2d a = mid - dir * (tab.width / 2.0);
  Eigen::Vector2d b = mid + dir * (tab.width / 2.0);

  LobeContour out = contour;
  out.tab.reset();
  out.points.clear();
  auto along = [&](const Eigen::Vector2d& p) { return (p - h0).dot(dir); };
  double ta = along(a), tb = along(b);
  int inserted_apex = contour.apex_index;
  int new_hinge_end = -1;
  for (int i = 0; i < static_cast<int>(contour.points.size()); ++i) {
    const Eigen::Vector2d& p = contour.points[i];
    bool on_hinge = i >= contour.hinge_begin && i <= contour.hinge_end;
    bool inside_tab_span = on_hinge && along(p) > ta + 1e-9 && along(p) < tb - 1e-9;
    if (on_hinge && i > contour.hinge_begin && along(p) >= tb - 1e-9 &&
        along(contour.points[i - 1]) < tb - 1e-9) {
      // Crossing the tab span: emit the bump before resuming the hinge edge.
      out.points.push_back(a);
      out.points.push_back(a + outward * tab.depth);
      out.points.push_back(b + outward * tab.depth);
      out.points.push_back(b);
    }
    if (inside_tab_span) continue;
    if (i == contour.apex_index) inserted_apex = static_cast<int>(out.points.size());
    out.points.push_back(p);
    if (i == contour.hinge_end) new_hinge_end = static_cast<int>(out.points.size()) - 1;
  }
  out.apex_index = inserted_apex;
  out.hinge_end = new_hinge_end;
  validate_contour(out);
  return out;
}

// Splits the outline into the tagged boundary polylines used by the surface
// generators: the hinge range and the complementary free edge.
inline std::vector<std::vector<Eigen::Vector2d>> contour_polylines(
    const LobeContour& contour, std::vector<std::uint8_t>* tags) {
  validate_contour(contour);
  int n = static_cast<int>(contour.points.size());
  std::vector<Eigen::Vector2d> hinge, free_edge;
  for (int i = contour.hinge_begin;; i = (i + 1) % n) {
    hinge.push_back(contour.points[i]);
    if (i == contour.hinge_end) break;
  }
  for (int i = contour.hinge_end;; i = (i + 1) % n) {
    free_edge.push_back(contour.points[i]);
    if (i == contour.hinge_begin && free_edge.size() > 1) break;
  }
  tags->assign({kTagHinge, kTagFreeEdge});
  return {hinge, free_edge};
}

}  // namespace lobeforge
