#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "lobeforge/geometry/stl_io.hpp"
#include "lobeforge/solver/bistability.hpp"
#include "lobeforge/solver/newton.hpp"
#include "lobeforge/solver/opening_angle.hpp"

namespace lobeforge {

// Loading indents the as-built equilibrium; Snapping indents the inverted
// one, mirroring the two experimental directions.
enum class Direction { Loading, Snapping };

inline const char* direction_name(Direction d) {
  return d == Direction::Loading ? "loading" : "snapping";
}

struct ProtocolOptions {
  double indenter_radius = 2.5;   // mm, vertices within it are driven
  double holder_width = 3.0;      // mm, clamped strip along the hinge
  double apex_offset = 0.0;       // mm from the apex toward the hinge
  double stroke_step = 0.25;      // mm per increment
  double stroke_max = 12.0;       // mm
  double force_threshold = 0.01;  // N, contact detection for X1
  double drop_fraction = 0.2;     // relative force drop defining X2
  double snap_factor = 5.0;       // displacement / step ratio marking a snap
  double indentation_speed = 40.0;  // mm/s, converts stroke to trace time
  SolverOptions solver;
};

// Frozen description of one indentation run: start equilibrium, clamped
// holder, driven vertex patch and push axis.
struct IndentationScene {
  ShellModel shell;
  Configuration start;
  Constraints holder;               // fully fixed hinge strip
  std::vector<int> indenter_vertices;
  Eigen::Vector3d axis;             // unit vector, pushes into the surface
  Eigen::Vector3d indent_point;     // start-state position of the patch center
  int indent_vertex = -1;
  Direction direction = Direction::Loading;
};

namespace detail {

// Area-weighted vertex normals of the deformed surface.
inline std::vector<Eigen::Vector3d> deformed_vertex_normals(const TriMesh& mesh,
                                                            const Configuration& x) {
  std::vector<Eigen::Vector3d> normals(mesh.positions.size(), Eigen::Vector3d::Zero());
  for (const auto& tri : mesh.triangles) {
    Eigen::Vector3d n = (config_position(x, tri[1]) - config_position(x, tri[0]))
                            .cross(config_position(x, tri[2]) - config_position(x, tri[0]));
    for (int v : tri) normals[v] += n;
  }
  return normals;
}

}  // namespace detail

// Clamp constraints for the strip of vertices within holder_width (graph
// distance) of the hinge edge.
inline Constraints make_holder_constraints(const TriMesh& mesh, double holder_width) {
  std::vector<int> hinge = vertices_with_tag(mesh, kTagHinge);
  require(!hinge.empty(), ErrorCode::MissingTags, "holder needs hinge-tagged vertices");
  MeshTopology topo = build_topology(mesh);
  std::vector<double> dist = graph_distances(mesh, topo, hinge);
  Constraints c;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (dist[v] <= holder_width) c.fixed.push_back(v);
  return c;
}

inline IndentationScene build_indentation_scene(const ShellModel& shell,
                                                Direction direction,
                                                const ProtocolOptions& options = {}) {
  require(options.indenter_radius > 0.0, ErrorCode::RangeError,
          "indenter radius must be positive");
  require(options.apex_offset >= 0.0, ErrorCode::RangeError,
          "apex offset must be non-negative");
  IndentationScene scene;
  scene.shell = shell;
  scene.direction = direction;
  scene.holder = make_holder_constraints(shell.mesh, options.holder_width);

  Configuration rest = configuration_from_mesh(shell.mesh);
  EquilibriumState eq = find_equilibrium(shell, rest, scene.holder, options.solver);
  require(eq.converged, ErrorCode::DegenerateDesign, "as-built state does not relax");
  if (direction == Direction::Snapping) {
    EquilibriumState inv =
        detail::relax_inverted(shell, eq.x, scene.holder, options.solver);
    require(inv.converged, ErrorCode::DegenerateDesign, "inverted state does not relax");
    double dist = 0.0;
    for (int v = 0; v < shell.mesh.vertex_count(); ++v)
      dist = std::max(dist,
                      (config_position(inv.x, v) - config_position(eq.x, v)).norm());
    require(dist > 0.5, ErrorCode::DegenerateDesign,
            "no distinct inverted state; snapping scene impossible");
    eq = inv;
  }
  scene.start = eq.x;

  // Indentation patch center: the apex, or a vertex apex_offset along the
  // shortest surface path toward the hinge midpoint.
  int center = shell.mesh.apex;
  require(center >= 0, ErrorCode::MissingTags, "mesh has no apex vertex");
  if (options.apex_offset > 0.0) {
    MeshTopology topo = build_topology(shell.mesh);
    std::vector<int> run = detail::ordered_hinge_run(shell.mesh);
    int mid = detail::hinge_mid_vertex(shell.mesh, run);
    std::vector<int> path = shortest_path(shell.mesh, topo, shell.mesh.apex, mid);
    double walked = 0.0;
    center = path.back();
    for (size_t i = 1; i < path.size(); ++i) {
      walked += (config_position(scene.start, path[i]) -
                 config_position(scene.start, path[i - 1]))
                    .norm();
      if (walked >= options.apex_offset) {
        center = path[i];
        break;
      }
    }
  }
  scene.indent_vertex = center;
  scene.indent_point = config_position(scene.start, center);

  std::vector<bool> held(shell.mesh.vertex_count(), false);
  for (int v : scene.holder.fixed) held[v] = true;
  require(!held[center], ErrorCode::ConstraintConflict,
          "indentation point lies inside the holder clamp");
  for (int v = 0; v < shell.mesh.vertex_count(); ++v) {
    if (held[v]) continue;
    if ((config_position(scene.start, v) - scene.indent_point).norm() <=
        options.indenter_radius)
      scene.indenter_vertices.push_back(v);
  }
  require(!scene.indenter_vertices.empty(), ErrorCode::RangeError,
          "no vertices under the indenter");

  std::vector<Eigen::Vector3d> normals =
      detail::deformed_vertex_normals(shell.mesh, scene.start);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int v : scene.indenter_vertices) mean += normals[v];
  require(mean.norm() > 1e-9, ErrorCode::DegenerateDesign,
          "indentation patch has no defined normal");
  // The indenter always drives the dome toward its other stable side, so
  // the patch normal is oriented against the current elevation above the
  // hinge base plane; triangle winding must not decide the push direction.
  std::vector<int> run = detail::ordered_hinge_run(shell.mesh);
  int mid = detail::hinge_mid_vertex(shell.mesh, run);
  Eigen::Vector3d base = detail::oriented_base_normal(shell.mesh, run, mid);
  double elevation = opening_angle(shell.mesh, scene.start) >= 0.0 ? 1.0 : -1.0;
  scene.axis = mean.normalized();
  if (elevation * scene.axis.dot(base) > 0.0) scene.axis = -scene.axis;
  return scene;
}

}  // namespace lobeforge
