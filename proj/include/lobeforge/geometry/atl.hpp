#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "lobeforge/core/error.hpp"
#include "lobeforge/geometry/contour.hpp"
#include "lobeforge/geometry/surface_patch.hpp"

namespace lobeforge {

// Projection target for the anatomy-like design: a planar sketch is thrown
// onto an axis-aligned ellipsoid along a fixed direction.
struct EllipsoidSpec {
  Eigen::Vector3d semi_axes{30.0, 25.0, 15.0};
  Eigen::Vector3d center{0.0, 0.0, 0.0};
  Eigen::Vector3d direction{0.0, 0.0, 1.0};
};

inline void validate_ellipsoid(const EllipsoidSpec& spec) {
  require(spec.semi_axes.minCoeff() > 0.0, ErrorCode::RangeError,
          "ellipsoid semi-axes must be positive");
  require(spec.direction.norm() > 1e-12, ErrorCode::RangeError,
          "projection direction must be nonzero");
}

// Casts a ray from the sketch point (embedded at z = 0) along the projection
// direction and returns the far intersection, i.e. the surface piece facing
// the ray origin side for the default upward direction.
inline Eigen::Vector3d project_to_ellipsoid(const Eigen::Vector2d& sketch,
                                            const EllipsoidSpec& spec) {
  Eigen::Vector3d d = spec.direction.normalized();
  Eigen::Vector3d p0(sketch.x(), sketch.y(), 0.0);
  Eigen::Vector3d inv = spec.semi_axes.cwiseInverse();
  Eigen::Vector3d q = (p0 - spec.center).cwiseProduct(inv);
  Eigen::Vector3d r = d.cwiseProduct(inv);
  double a = r.squaredNorm();
  double b = 2.0 * q.dot(r);
  double c = q.squaredNorm() - 1.0;
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0)
    fail(ErrorCode::ProjectionMiss, "sketch point projects outside the ellipsoid");
  double t = (-b + std::sqrt(disc)) / (2.0 * a);
  return p0 + t * d;
}

// Builds the doubly curved lobe surface by projecting the sketch outline and
// interior onto the ellipsoid. The returned patch keeps the hinge and free
// edge as separately tagged boundary polylines.
inline SurfacePatch generate_atl_surface(const LobeContour& contour,
                                         const EllipsoidSpec& ellipsoid) {
  validate_ellipsoid(ellipsoid);
  LobeContour shaped = apply_tab(contour);
  validate_contour(shaped);

  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& p : shaped.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Eigen::Vector2d size = hi - lo;
  require(size.minCoeff() > 0.0, ErrorCode::QualityFailure, "contour has zero extent");

  for (const auto& p : shaped.points) project_to_ellipsoid(p, ellipsoid);

  SurfacePatch patch;
  patch.evaluate = [lo, size, ellipsoid](double u, double v) {
    Eigen::Vector2d sketch = lo + Eigen::Vector2d(u * size.x(), v * size.y());
    return project_to_ellipsoid(sketch, ellipsoid);
  };
  auto to_uv = [lo, size](const Eigen::Vector2d& p) {
    return Eigen::Vector2d((p.x() - lo.x()) / size.x(), (p.y() - lo.y()) / size.y());
  };
  std::vector<std::uint8_t> tags;
  auto polylines = contour_polylines(shaped, &tags);
  for (size_t s = 0; s < polylines.size(); ++s) {
    BoundarySegment seg;
    seg.tag = tags[s];
    for (const auto& p : polylines[s]) seg.uv.push_back(to_uv(p));
    patch.boundary.push_back(std::move(seg));
  }
  patch.apex_uv = to_uv(shaped.points[shaped.apex_index]);
  return patch;
}

}  // namespace lobeforge
