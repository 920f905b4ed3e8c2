#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lobeforge/core/error.hpp"
#include "lobeforge/core/tri_mesh.hpp"
#include "lobeforge/shell/shell_model.hpp"

namespace lobeforge {
namespace detail {

// Hinge vertices ordered along the boundary loop, as one contiguous run.
inline std::vector<int> ordered_hinge_run(const TriMesh& mesh) {
  std::vector<int> hinge = vertices_with_tag(mesh, kTagHinge);
  require(!hinge.empty(), ErrorCode::DegenerateHinge, "mesh has no hinge-tagged vertices");
  MeshTopology topo = build_topology(mesh);
  auto loops = boundary_loops(mesh, topo);
  for (const auto& loop : loops) {
    int n = static_cast<int>(loop.size());
    auto tagged = [&](int i) { return (mesh.tags[loop[i]] & kTagHinge) != 0; };
    int start = -1;
    for (int i = 0; i < n; ++i) {
      if (tagged(i) && !tagged((i + n - 1) % n)) {
        start = i;
        break;
      }
    }
    if (start == -1) {
      // Either no hinge on this loop, or the whole loop is hinge-tagged.
      if (!tagged(0)) continue;
      return loop;
    }
    std::vector<int> run;
    for (int i = start; tagged(i % n) && run.size() < loop.size(); ++i)
      run.push_back(loop[i % n]);
    if (run.size() >= 2) return run;
  }
  fail(ErrorCode::DegenerateHinge, "hinge vertices do not form a boundary run");
}

// Vertex closest to the arc-length midpoint of the rest hinge polyline.
inline int hinge_mid_vertex(const TriMesh& mesh, const std::vector<int>& run) {
  std::vector<double> arc(run.size(), 0.0);
  for (size_t i = 1; i < run.size(); ++i)
    arc[i] = arc[i - 1] + (mesh.positions[run[i]] - mesh.positions[run[i - 1]]).norm();
  double half = arc.back() / 2.0;
  size_t best = 0;
  for (size_t i = 1; i < run.size(); ++i)
    if (std::abs(arc[i] - half) < std::abs(arc[best] - half)) best = i;
  return run[best];
}

// Unit normal of the hinge base plane, built from the as-designed mesh: the
// mean surface normal of the faces touching the hinge, with the component
// along the principal hinge direction projected out. A best-fit plane
// through the hinge vertices would not do here: on a curved hinge it
// absorbs the hinge-to-apex chord and the measured angle collapses toward
// zero. The base plane is a property of the mounted hinge, so it is always
// evaluated on the rest geometry; protocols clamp the hinge, which keeps it
// aligned with the deformed states being measured.
inline Eigen::Vector3d hinge_base_normal(const TriMesh& mesh, const std::vector<int>& run) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int v : run) c += mesh.positions[v];
  c /= static_cast<double>(run.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int v : run) {
    Eigen::Vector3d d = mesh.positions[v] - c;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  require(es.eigenvalues()(2) > 1e-12, ErrorCode::DegenerateHinge,
          "hinge vertices coincide");
  Eigen::Vector3d line_dir = es.eigenvectors().col(2);

  Eigen::Vector3d mean_normal = Eigen::Vector3d::Zero();
  for (const auto& tri : mesh.triangles) {
    bool touches = false;
    for (int corner : tri)
      if (mesh.tags[corner] & kTagHinge) touches = true;
    if (!touches) continue;
    Eigen::Vector3d a = mesh.positions[tri[0]];
    Eigen::Vector3d b = mesh.positions[tri[1]];
    Eigen::Vector3d d = mesh.positions[tri[2]];
    mean_normal += 0.5 * (b - a).cross(d - a);
  }
  Eigen::Vector3d n = mean_normal - mean_normal.dot(line_dir) * line_dir;
  require(n.norm() > 1e-9, ErrorCode::DegenerateHinge,
          "hinge-adjacent faces do not define a base plane");
  return n.normalized();
}

// Base-plane normal flipped so the rest apex chord has a non-negative
// component along it: the "open" side of the hinge is positive.
inline Eigen::Vector3d oriented_base_normal(const TriMesh& mesh,
                                            const std::vector<int>& run, int mid) {
  require(mesh.apex >= 0 && mesh.apex < mesh.vertex_count(), ErrorCode::MissingTags,
          "mesh has no apex vertex");
  Eigen::Vector3d normal = hinge_base_normal(mesh, run);
  Eigen::Vector3d rest_chord = mesh.positions[mesh.apex] - mesh.positions[mid];
  require(rest_chord.norm() > 1e-9, ErrorCode::DegenerateHinge, "apex lies on the hinge");
  if (rest_chord.dot(normal) < 0.0) normal = -normal;
  return normal;
}

}  // namespace detail

// Signed elevation angle, in degrees, of the chord from the hinge midpoint
// to the apex above the hinge base plane. Oriented so the as-built rest
// state measures non-negative; actuation toward inversion decreases it and
// a snapped-through state comes out negative.
inline double opening_angle(const TriMesh& mesh, const Configuration& x) {
  std::vector<int> run = detail::ordered_hinge_run(mesh);
  int mid = detail::hinge_mid_vertex(mesh, run);
  Eigen::Vector3d normal = detail::oriented_base_normal(mesh, run, mid);

  Eigen::Vector3d chord = config_position(x, mesh.apex) - config_position(x, mid);
  require(chord.norm() > 1e-9, ErrorCode::DegenerateHinge, "apex coincides with hinge");
  double sine = std::clamp(chord.dot(normal) / chord.norm(), -1.0, 1.0);
  return std::asin(sine) * 180.0 / M_PI;
}

}  // namespace lobeforge
