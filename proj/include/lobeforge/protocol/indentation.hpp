#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "lobeforge/protocol/scene.hpp"

namespace lobeforge {

struct TraceSample {
  double time_s = 0.0;
  double stroke_mm = 0.0;
  double force_n = 0.0;
};

struct IndentationTrace {
  std::vector<TraceSample> samples;
  bool snap_detected = false;
  double snap_stroke = std::numeric_limits<double>::quiet_NaN();
  bool completed = true;  // false when the solver failed mid-sweep
  Direction direction = Direction::Loading;
  Configuration final_state;
};

// Displacement-controlled indentation with a one-sided probe. The probe face
// is the start-state patch surface translated along the push axis by the
// stroke; patch vertices in contact have their axial coordinate prescribed to
// the face, a contact is released as soon as its reaction turns adhesive, and
// a released vertex re-engages when the advancing face overtakes it. Once the
// shell passes its limit point it runs ahead of the probe, so the measured
// force rises to a peak and collapses at the snap. The sweep ends at
// stroke_max, at snap detection (free vertices jump much farther than the
// imposed step), or on solver failure.
inline IndentationTrace run_indentation(const IndentationScene& scene,
                                        const ProtocolOptions& options = {}) {
  require(options.stroke_step > 0.0, ErrorCode::RangeError, "stroke step must be positive");
  require(options.stroke_max >= options.stroke_step, ErrorCode::RangeError,
          "stroke range shorter than one step");
  IndentationTrace trace;
  trace.direction = scene.direction;

  Eigen::Vector3d axis = scene.axis.normalized();
  const std::vector<int>& patch = scene.indenter_vertices;
  std::vector<double> base_coord(patch.size());
  for (size_t i = 0; i < patch.size(); ++i)
    base_coord[i] = axis.dot(config_position(scene.start, patch[i]));

  std::vector<bool> driven(scene.shell.mesh.vertex_count(), false);
  for (int v : patch) driven[v] = true;
  for (int v : scene.holder.fixed) driven[v] = true;

  const double release_tol = 10.0 * options.solver.gradient_tol;  // N
  const double penetration_tol = 1e-6;                            // mm
  constexpr int kMaxContactPasses = 32;
  std::vector<bool> in_contact(patch.size(), true);

  Configuration x = scene.start;
  trace.samples.push_back({0.0, 0.0, 0.0});

  int n_steps = static_cast<int>(std::floor(options.stroke_max / options.stroke_step + 1e-9));
  for (int k = 1; k <= n_steps; ++k) {
    double stroke = k * options.stroke_step;
    Configuration x_step = x;
    double force = 0.0;
    bool converged = true;
    // Alternate between dropping adhesive contacts and re-engaging
    // penetrating vertices until the active set is complementary.
    for (int pass = 0; pass < kMaxContactPasses; ++pass) {
      Constraints constraints = scene.holder;
      for (size_t i = 0; i < patch.size(); ++i) {
        if (!in_contact[i]) continue;
        AxialPrescription p;
        p.vertex = patch[i];
        p.axis = axis;
        p.target = base_coord[i] + stroke;
        constraints.prescribed.push_back(p);
      }
      EquilibriumState eq = find_equilibrium(scene.shell, x_step, constraints, options.solver);
      if (!eq.converged) {
        converged = false;
        break;
      }
      x_step = eq.x;
      Eigen::VectorXd g = energy_gradient(scene.shell, x_step, options.solver.threads);
      bool changed = false;
      force = 0.0;
      for (size_t i = 0; i < patch.size(); ++i) {
        if (!in_contact[i]) continue;
        double reaction = axis.dot(g.segment<3>(3 * patch[i]));
        if (reaction < -release_tol) {
          in_contact[i] = false;
          changed = true;
        } else {
          force += reaction;
        }
      }
      if (!changed) {
        for (size_t i = 0; i < patch.size(); ++i) {
          if (in_contact[i]) continue;
          double gap = axis.dot(config_position(x_step, patch[i])) - (base_coord[i] + stroke);
          if (gap < -penetration_tol) {
            in_contact[i] = true;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (!converged) {
      trace.completed = false;
      break;
    }
    double moved = 0.0;
    for (int v = 0; v < scene.shell.mesh.vertex_count(); ++v) {
      if (driven[v]) continue;
      moved = std::max(moved, (config_position(x_step, v) - config_position(x, v)).norm());
    }
    x = x_step;
    trace.samples.push_back({stroke / options.indentation_speed, stroke, force});
    if (moved > options.snap_factor * options.stroke_step) {
      trace.snap_detected = true;
      trace.snap_stroke = stroke;
      break;
    }
  }
  trace.final_state = x;
  return trace;
}

}  // namespace lobeforge
