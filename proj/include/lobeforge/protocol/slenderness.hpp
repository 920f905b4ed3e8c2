#pragma once

#include "lobeforge/core/tri_mesh.hpp"
#include "lobeforge/solver/opening_angle.hpp"

namespace lobeforge {

// Slenderness of a lobe: geodesic hinge-to-apex length over the mean wall
// thickness. Above the threshold the shell is membrane-dominated and a
// two-phase reopening snap is expected; below it bending wins and the lobe
// reopens smoothly.
struct SlendernessReport {
  double length = 0.0;          // mm, hinge midpoint to apex along edges
  double mean_thickness = 0.0;  // mm, area weighted
  double slenderness = 0.0;
  double threshold = 0.0;
  bool snap_expected = false;
};

inline SlendernessReport slenderness(const TriMesh& mesh, double threshold = 30.0) {
  require(threshold > 0.0, ErrorCode::RangeError, "threshold must be positive");
  require(mesh.apex >= 0, ErrorCode::MissingTags, "mesh has no apex vertex");
  std::vector<int> run = detail::ordered_hinge_run(mesh);
  int mid = detail::hinge_mid_vertex(mesh, run);
  MeshTopology topo = build_topology(mesh);
  std::vector<double> dist = graph_distances(mesh, topo, {mid});

  SlendernessReport report;
  report.length = dist[mesh.apex];
  require(std::isfinite(report.length) && report.length > 0.0,
          ErrorCode::DegenerateDesign, "apex unreachable from the hinge");
  double area_sum = 0.0, weighted = 0.0;
  for (const auto& tri : mesh.triangles) {
    double area = triangle_area(mesh.positions[tri[0]], mesh.positions[tri[1]],
                                mesh.positions[tri[2]]);
    double t =
        (mesh.thickness[tri[0]] + mesh.thickness[tri[1]] + mesh.thickness[tri[2]]) / 3.0;
    area_sum += area;
    weighted += area * t;
  }
  report.mean_thickness = weighted / area_sum;
  report.slenderness = report.length / report.mean_thickness;
  report.threshold = threshold;
  report.snap_expected = report.slenderness >= threshold;
  return report;
}

}  // namespace lobeforge
