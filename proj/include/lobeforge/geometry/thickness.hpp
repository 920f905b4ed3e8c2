#pragma once

#include <algorithm>
#include <cmath>

#include "lobeforge/core/error.hpp"
#include "lobeforge/core/tri_mesh.hpp"

namespace lobeforge {

// Wall thickness prescription. Constant everywhere, or a linear blend from
// the hinge (base) to the apex (tip) measured by relative geodesic distance.
struct ThicknessField {
  enum class Kind { Constant, Taper };
  Kind kind = Kind::Constant;
  double value = 0.93;  // mm, Constant
  double tip = 0.9;     // mm at the apex, Taper
  double base = 1.3;    // mm at the hinge, Taper

  static ThicknessField constant(double t) {
    ThicknessField f;
    f.kind = Kind::Constant;
    f.value = t;
    return f;
  }
  static ThicknessField taper(double tip, double base) {
    ThicknessField f;
    f.kind = Kind::Taper;
    f.tip = tip;
    f.base = base;
    return f;
  }
  double min_value() const {
    return kind == Kind::Constant ? value : std::min(tip, base);
  }
  double max_value() const {
    return kind == Kind::Constant ? value : std::max(tip, base);
  }
};

inline void validate_thickness_field(const ThicknessField& field) {
  require(field.min_value() > 0.0, ErrorCode::RangeError,
          "thickness must be positive");
}

// Returns a copy of the mesh with per-vertex thickness filled in. The taper
// blend q = d_apex / (d_apex + d_hinge) is exactly 0 at the apex and 1 on
// the hinge, so the endpoint values are met exactly.
inline TriMesh assign_thickness(const TriMesh& mesh, const ThicknessField& field) {
  validate_thickness_field(field);
  TriMesh out = mesh;
  if (field.kind == ThicknessField::Kind::Constant) {
    out.thickness.assign(mesh.positions.size(), field.value);
    return out;
  }
  require(mesh.apex >= 0, ErrorCode::MissingTags, "taper needs an apex vertex");
  std::vector<int> hinge = vertices_with_tag(mesh, kTagHinge);
  require(!hinge.empty(), ErrorCode::MissingTags, "taper needs hinge-tagged vertices");
  MeshTopology topo = build_topology(mesh);
  std::vector<double> d_apex = graph_distances(mesh, topo, {mesh.apex});
  std::vector<double> d_hinge = graph_distances(mesh, topo, hinge);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    double total = d_apex[v] + d_hinge[v];
    double q = total > 0.0 ? d_apex[v] / total : 0.0;
    out.thickness[v] = field.tip + (field.base - field.tip) * q;
  }
  return out;
}

// Doubles the wall within a band along the hinge edge, the printed rib that
// stiffens the lower edge of the lobe.
inline TriMesh apply_rib(const TriMesh& mesh, double rib_offset, double factor = 2.0) {
  require(rib_offset > 0.0, ErrorCode::RangeError, "rib offset must be positive");
  require(factor > 0.0, ErrorCode::RangeError, "rib factor must be positive");
  std::vector<int> hinge = vertices_with_tag(mesh, kTagHinge);
  require(!hinge.empty(), ErrorCode::MissingTags, "rib needs hinge-tagged vertices");
  MeshTopology topo = build_topology(mesh);
  std::vector<double> d = graph_distances(mesh, topo, hinge);
  TriMesh out = mesh;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (d[v] <= rib_offset) out.thickness[v] *= factor;
  return out;
}

}  // namespace lobeforge
