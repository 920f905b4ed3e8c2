#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "lobeforge/core/error.hpp"
#include "lobeforge/core/tri_mesh.hpp"

namespace lobeforge {

// One tagged polyline of a patch boundary, ordered along the outline.
// Consecutive segments share endpoints; the full chain is closed and
// counter-clockwise in the uv plane.
struct BoundarySegment {
  std::vector<Eigen::Vector2d> uv;
  std::uint8_t tag = kTagNone;
};

// Smooth parametric surface over a polygonal uv domain. The evaluator must
// be finite over the whole domain; triangulation samples it densely enough
// that 3D edge lengths stay below the requested target.
struct SurfacePatch {
  std::function<Eigen::Vector3d(double, double)> evaluate;
  std::vector<BoundarySegment> boundary;
  Eigen::Vector2d apex_uv = Eigen::Vector2d::Zero();
};

inline double polygon_signed_area(const std::vector<Eigen::Vector2d>& poly) {
  double a = 0.0;
  int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

// Even-odd crossing test. Points within eps of an edge count as inside,
// which is the safe choice for centroid filtering of boundary triangles.
inline bool point_in_polygon(const std::vector<Eigen::Vector2d>& poly,
                             const Eigen::Vector2d& p, double eps = 1e-12) {
  int n = static_cast<int>(poly.size());
  bool inside = false;
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[j];
    const auto& b = poly[i];
    Eigen::Vector2d d = b - a;
    double len2 = d.squaredNorm();
    if (len2 > 0.0) {
      double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
      if ((a + t * d - p).squaredNorm() < eps * eps) return true;
    }
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline bool segments_properly_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                        const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  auto orient = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                   const Eigen::Vector2d& r) {
    double v = (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    if (v > 1e-14) return 1;
    if (v < -1e-14) return -1;
    return 0;
  };
  int o1 = orient(a, b, c), o2 = orient(a, b, d);
  int o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

inline bool polygon_self_intersects(const std::vector<Eigen::Vector2d>& poly) {
  int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_properly_intersect(poly[i], poly[(i + 1) % n], poly[j],
                                      poly[(j + 1) % n]))
        return true;
    }
  }
  return false;
}

// Closed uv outline of the patch (concatenated boundary segments) together
// with per-point tags. Shared segment endpoints carry both tags.
struct PatchOutline {
  std::vector<Eigen::Vector2d> uv;
  std::vector<std::uint8_t> tags;
};

inline PatchOutline patch_outline(const SurfacePatch& patch) {
  require(!patch.boundary.empty(), ErrorCode::MissingTags, "patch has no boundary");
  PatchOutline out;
  int n_seg = static_cast<int>(patch.boundary.size());
  for (int s = 0; s < n_seg; ++s) {
    const BoundarySegment& seg = patch.boundary[s];
    require(seg.uv.size() >= 2, ErrorCode::QualityFailure, "boundary segment too short");
    const BoundarySegment& prev = patch.boundary[(s + n_seg - 1) % n_seg];
    require((prev.uv.back() - seg.uv.front()).norm() < 1e-9, ErrorCode::QualityFailure,
            "boundary segments do not chain");
    for (size_t i = 0; i + 1 < seg.uv.size(); ++i) {
      out.uv.push_back(seg.uv[i]);
      out.tags.push_back(i == 0 ? static_cast<std::uint8_t>(seg.tag | prev.tag)
                                : seg.tag);
    }
  }
  require(out.uv.size() >= 3, ErrorCode::QualityFailure, "outline degenerate");
  require(polygon_signed_area(out.uv) > 0.0, ErrorCode::QualityFailure,
          "outline must be counter-clockwise");
  require(!polygon_self_intersects(out.uv), ErrorCode::QualityFailure,
          "outline self-intersects");
  return out;
}

// Largest singular value of the uv->3D Jacobian, sampled on a grid over the
// domain. Sets the uv sampling density needed to honor a 3D edge target.
inline double max_metric_stretch(const SurfacePatch& patch,
                                 const std::vector<Eigen::Vector2d>& outline,
                                 int samples = 24) {
  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& p : outline) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double h = 1e-6 * std::max(hi.x() - lo.x(), hi.y() - lo.y());
  double worst = 0.0;
  for (int i = 0; i <= samples; ++i) {
    for (int j = 0; j <= samples; ++j) {
      Eigen::Vector2d p = lo + Eigen::Vector2d((hi.x() - lo.x()) * i / samples,
                                               (hi.y() - lo.y()) * j / samples);
      if (!point_in_polygon(outline, p, 1e-9)) continue;
      Eigen::Vector3d du =
          (patch.evaluate(p.x() + h, p.y()) - patch.evaluate(p.x() - h, p.y())) / (2 * h);
      Eigen::Vector3d dv =
          (patch.evaluate(p.x(), p.y() + h) - patch.evaluate(p.x(), p.y() - h)) / (2 * h);
      Eigen::Matrix2d g;
      g << du.dot(du), du.dot(dv), du.dot(dv), dv.dot(dv);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g);
      worst = std::max(worst, std::sqrt(std::max(0.0, es.eigenvalues()(1))));
    }
  }
  require(worst > 0.0, ErrorCode::QualityFailure, "no domain samples for stretch estimate");
  return worst;
}

}  // namespace lobeforge
