#pragma once

// CSV export of trajectories. Doubles are written in shortest round-trip
// form so re-parsing reproduces the exact in-memory values.

#include <iosfwd>
#include <string>
#include <vector>

#include "mac/game_sim.h"

namespace mac {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Columns t, x_0.., u_0.., w_0.., payoff_prefix. One row per step t < N
/// plus a final row holding x_N with the remaining columns empty.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);

struct ParsedTrajectory {
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<Vector> disturbances;
  std::vector<double> running_payoff;
};

/// Inverse of write_trajectory_csv. Throws invalid-argument on malformed
/// input.
ParsedTrajectory parse_trajectory_csv(std::istream& in);

}  // namespace mac
