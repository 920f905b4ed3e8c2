#pragma once

#include <Eigen/Dense>

#include "lobeforge/solver/newton.hpp"
#include "lobeforge/solver/opening_angle.hpp"
#include "lobeforge/solver/spectrum.hpp"

namespace lobeforge {

struct BistabilityReport {
  EquilibriumState state_a;  // relaxed from the as-built configuration
  EquilibriumState state_b;  // relaxed from the mirrored guess
  double min_eigenvalue_a = 0.0;
  double min_eigenvalue_b = 0.0;
  double max_vertex_distance = 0.0;
  bool distinct = false;
  bool both_stable = false;

  bool bistable() const {
    return distinct && both_stable && state_a.converged && state_b.converged;
  }
};

namespace detail {

// Initial guess for the inverted equilibrium: the configuration reflected
// through the rest hinge base plane, with the kept (clamped) vertices
// restored so the relaxation runs on the same constraint values as the
// source state. A best-fit plane of the whole boundary would not do: the
// boundary of a doubly curved lobe is far from planar, so reflecting
// through it neither inverts the dome nor preserves the clamp.
inline Configuration inverted_state_guess(const TriMesh& mesh, const Configuration& x,
                                          const std::vector<int>& keep) {
  std::vector<int> run = ordered_hinge_run(mesh);
  int mid = hinge_mid_vertex(mesh, run);
  Eigen::Vector3d n = oriented_base_normal(mesh, run, mid);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int v : run) c += mesh.positions[v];
  c /= static_cast<double>(run.size());

  Configuration out = x;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    Eigen::Vector3d p = config_position(x, v);
    out.segment<3>(3 * v) = p - 2.0 * (p - c).dot(n) * n;
  }
  for (int v : keep) out.segment<3>(3 * v) = x.segment<3>(3 * v);
  return out;
}

// Relaxation into the inverted basin. The reflected guess carries a crease
// where the kept clamp meets the flipped body; relaxing it directly lets the
// crease unroll the whole dome back to the source state. Instead the apex
// cap is pinned at its reflected position while the crease irons out, then
// the pin is dropped. A monostable shell still returns to the source state
// in the second stage, so the staging biases nothing.
inline EquilibriumState relax_inverted(const ShellModel& shell, const Configuration& from,
                                       const Constraints& constraints,
                                       const SolverOptions& solver_options = {}) {
  const TriMesh& mesh = shell.mesh;
  Configuration guess = inverted_state_guess(mesh, from, constraints.fixed);

  require(mesh.apex >= 0, ErrorCode::MissingTags, "mesh has no apex vertex");
  MeshTopology topo = build_topology(mesh);
  std::vector<double> from_hinge =
      graph_distances(mesh, topo, vertices_with_tag(mesh, kTagHinge));
  std::vector<double> from_apex = graph_distances(mesh, topo, {mesh.apex});
  double reach = from_hinge[mesh.apex];
  require(reach > 0.0, ErrorCode::DegenerateHinge, "apex coincides with the hinge");

  std::vector<bool> held(mesh.vertex_count(), false);
  for (int v : constraints.fixed) held[v] = true;
  Constraints staged = constraints;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (!held[v] && from_apex[v] <= 0.25 * reach) staged.fixed.push_back(v);

  EquilibriumState pinned = find_equilibrium(shell, guess, staged, solver_options);
  const Configuration& handoff = pinned.converged ? pinned.x : guess;
  return find_equilibrium(shell, handoff, constraints, solver_options);
}

}  // namespace detail

// Relaxes the as-built state and a mirrored guess and reports whether two
// distinct stable equilibria exist under the given constraints.
inline BistabilityReport check_bistability(const ShellModel& shell,
                                           const Constraints& constraints,
                                           const SolverOptions& solver_options = {},
                                           const EigenOptions& eigen_options = {},
                                           double distinct_tol = 0.5) {
  BistabilityReport report;
  Configuration rest = configuration_from_mesh(shell.mesh);
  report.state_a = find_equilibrium(shell, rest, constraints, solver_options);
  report.state_b =
      detail::relax_inverted(shell, report.state_a.x, constraints, solver_options);

  double worst = 0.0;
  for (int v = 0; v < shell.mesh.vertex_count(); ++v) {
    double d = (config_position(report.state_a.x, v) -
                config_position(report.state_b.x, v))
                   .norm();
    worst = std::max(worst, d);
  }
  report.max_vertex_distance = worst;
  report.distinct = worst > distinct_tol;

  report.min_eigenvalue_a =
      min_stiffness_eigenvalue(shell, report.state_a.x, constraints, eigen_options);
  report.min_eigenvalue_b =
      min_stiffness_eigenvalue(shell, report.state_b.x, constraints, eigen_options);
  report.both_stable = report.min_eigenvalue_a > 0.0 && report.min_eigenvalue_b > 0.0;
  return report;
}

}  // namespace lobeforge
