#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "lobeforge/core/error.hpp"
#include "lobeforge/geometry/contour.hpp"
#include "lobeforge/geometry/surface_patch.hpp"

namespace lobeforge {

// Analytic doubly curved rectangle: a biquadratic height field over a
// chord x width sketch, with independent curvature along the hinge (long)
// and transverse directions. Optionally extended by a flat restraining
// strip beyond the hinge edge and a clamp tab protruding past it.
struct SGPatchSpec {
  double chord = 40.0;            // mm, hinge-parallel extent
  double width = 25.0;            // mm, hinge-to-free-edge extent
  double kappa_long = -0.02;      // 1/mm, curvature along the hinge direction
  double kappa_trans = -0.02;     // 1/mm, curvature across
  bool restraining_edge = false;
  double restraining_width = 3.0; // mm
  std::optional<TabSpec> tab;
};

inline void validate_sg(const SGPatchSpec& spec) {
  require(spec.chord > 0.0 && spec.width > 0.0, ErrorCode::RangeError,
          "patch dimensions must be positive");
  require(spec.kappa_long != 0.0 && spec.kappa_trans != 0.0 &&
              (spec.kappa_long > 0.0) == (spec.kappa_trans > 0.0),
          ErrorCode::InvalidCurvature,
          "curvatures must be nonzero and share a sign");
  if (spec.restraining_edge)
    require(spec.restraining_width > 0.0, ErrorCode::RangeError,
            "restraining strip width must be positive");
  if (spec.tab) {
    require(spec.tab->width > 0.0 && spec.tab->depth > 0.0, ErrorCode::RangeError,
            "tab dimensions must be positive");
    require(spec.tab->width < spec.chord, ErrorCode::RangeError,
            "tab wider than hinge edge");
  }
}

// Height at a sketch point. Below the hinge line the transverse profile is
// frozen, which yields the flat restraining strip.
inline double sg_height(const SGPatchSpec& spec, double x, double y) {
  double yc = std::max(y, -spec.width / 2.0);
  return 0.5 * (spec.kappa_long * x * x + spec.kappa_trans * yc * yc);
}

inline SurfacePatch generate_sg_surface(const SGPatchSpec& spec) {
  validate_sg(spec);
  double strip = spec.restraining_edge ? spec.restraining_width : 0.0;
  double x0 = -spec.chord / 2.0, x1 = spec.chord / 2.0;
  double y0 = -spec.width / 2.0 - strip, y1 = spec.width / 2.0;

  SurfacePatch patch;
  patch.evaluate = [spec, x0, x1, y0, y1](double u, double v) {
    double x = x0 + u * (x1 - x0);
    double y = y0 + v * (y1 - y0);
    return Eigen::Vector3d(x, y, sg_height(spec, x, y));
  };
  auto uv_of = [x0, x1, y0, y1](double x, double y) {
    return Eigen::Vector2d((x - x0) / (x1 - x0), (y - y0) / (y1 - y0));
  };
  BoundarySegment hinge;  // bottom edge, traversed left to right (CCW)
  hinge.tag = kTagHinge;
  if (spec.tab) {
    double a = -spec.tab->width / 2.0, b = spec.tab->width / 2.0;
    double yt = y0 - spec.tab->depth;
    hinge.uv = {uv_of(x0, y0), uv_of(a, y0), uv_of(a, yt),
                uv_of(b, yt), uv_of(b, y0), uv_of(x1, y0)};
  } else {
    hinge.uv = {uv_of(x0, y0), uv_of(x1, y0)};
  }
  BoundarySegment right;
  right.tag = kTagLateral;
  right.uv = {uv_of(x1, y0), uv_of(x1, y1)};
  BoundarySegment top;
  top.tag = kTagFreeEdge;
  top.uv = {uv_of(x1, y1), uv_of(x0, y1)};
  BoundarySegment left;
  left.tag = kTagLateral;
  left.uv = {uv_of(x0, y1), uv_of(x0, y0)};
  patch.boundary = {hinge, right, top, left};
  patch.apex_uv = uv_of(0.0, 0.0);
  return patch;
}

}  // namespace lobeforge
