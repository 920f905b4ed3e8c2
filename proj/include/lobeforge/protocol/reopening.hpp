#pragma once

#include "lobeforge/solver/continuation.hpp"

namespace lobeforge {

// Reopening either relaxes back smoothly or passes through a second snap,
// depending on the slenderness of the lobe.
enum class ReopeningMode { Smooth, TwoPhaseSnap };

inline const char* reopening_mode_name(ReopeningMode m) {
  return m == ReopeningMode::Smooth ? "smooth" : "two-phase-snap";
}

struct ReopeningResult {
  ActuationPath path;
  ReopeningMode mode = ReopeningMode::Smooth;
};

// Runs the actuation continuation over a descending schedule starting from
// a loaded (typically snapped) state and classifies the path.
inline ReopeningResult run_reopening(const ShellModel& shell,
                                     const Configuration& loaded_state,
                                     const Constraints& constraints,
                                     const std::vector<double>& reverse_schedule,
                                     const ContinuationOptions& options = {}) {
  require(!reverse_schedule.empty(), ErrorCode::EmptyData, "empty reopening schedule");
  for (size_t i = 1; i < reverse_schedule.size(); ++i)
    require(reverse_schedule[i] < reverse_schedule[i - 1], ErrorCode::RangeError,
            "reopening schedule must decrease");
  ReopeningResult result;
  result.path =
      continuation_actuation(shell, loaded_state, constraints, reverse_schedule, options);
  result.mode = result.path.snap_count() > 0 ? ReopeningMode::TwoPhaseSnap
                                             : ReopeningMode::Smooth;
  return result;
}

}  // namespace lobeforge
