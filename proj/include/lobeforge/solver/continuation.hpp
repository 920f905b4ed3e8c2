#pragma once

#include <vector>

#include "lobeforge/shell/energy.hpp"
#include "lobeforge/solver/newton.hpp"
#include "lobeforge/solver/opening_angle.hpp"

namespace lobeforge {

struct ContinuationOptions {
  ActuationState actuation;        // alpha_out is overwritten per step
  bool prestress_geometry = false;
  double prestress_scale = 0.35;   // rest-curvature bias toward inversion
  double snap_jump_deg = 5.0;      // opening-angle jump marking a snap
  SolverOptions solver;
};

struct PathSample {
  double alpha = 0.0;
  double opening_angle_deg = 0.0;
  double max_abs_strain = 0.0;
  double energy = 0.0;  // mJ
  bool snap = false;
  Configuration x;
  bool converged = false;
};

struct ActuationPath {
  std::vector<PathSample> samples;
  bool completed = true;  // false when a solve failed and the path truncated
  int snap_count() const {
    int n = 0;
    for (const auto& s : samples) n += s.snap ? 1 : 0;
    return n;
  }
};

// Quasi-static sweep of the layer actuation magnitude. Each step relaxes
// from the previous solution; a jump of the opening angle larger than
// snap_jump_deg between consecutive converged states marks a snap-through.
inline ActuationPath continuation_actuation(const ShellModel& shell,
                                            const Configuration& initial,
                                            const Constraints& constraints,
                                            const std::vector<double>& schedule,
                                            const ContinuationOptions& options = {}) {
  require(!schedule.empty(), ErrorCode::EmptyData, "empty actuation schedule");
  ShellModel base =
      options.prestress_geometry ? apply_prestress(shell, options.prestress_scale) : shell;

  ActuationPath path;
  Configuration x = initial;
  double prev_angle = 0.0;
  bool have_prev = false;
  for (double alpha : schedule) {
    ActuationState act = options.actuation;
    act.alpha_out = alpha;
    ShellModel actuated = apply_layer_actuation(base, act);
    EquilibriumState eq = find_equilibrium(actuated, x, constraints, options.solver);
    if (!eq.converged) {
      path.completed = false;
      break;
    }
    x = eq.x;
    PathSample sample;
    sample.alpha = alpha;
    sample.opening_angle_deg = opening_angle(shell.mesh, x);
    sample.max_abs_strain = max_abs_strain(actuated, x);
    sample.energy = eq.energy;
    sample.x = x;
    sample.converged = true;
    sample.snap = have_prev &&
                  std::abs(sample.opening_angle_deg - prev_angle) > options.snap_jump_deg;
    prev_angle = sample.opening_angle_deg;
    have_prev = true;
    path.samples.push_back(std::move(sample));
  }
  return path;
}

}  // namespace lobeforge
