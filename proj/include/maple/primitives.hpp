#pragma once

#include <vector>

#include "maple/core.hpp"
#include "maple/sim.hpp"

namespace maple {

// One decision of the parameterized-action MDP: which primitive to run and
// the full-width parameter vector in [-1, 1] that it truncates and scales.
struct ParameterizedAction {
  int type = 0;
  Vec params;
};

// What executing one primitive did to the world.
struct PrimitiveOutcome {
  int atomic_steps = 0;
  double reward_sum = 0.0;  // dense task reward summed over the atomic steps
  bool reached_target = false;  // controller hit its tolerance inside the budget
  bool success_seen = false;    // task success held after some atomic step
  std::vector<AtomicAction> actions;  // commands emitted, in order
  std::vector<double> step_rewards;   // dense reward after each command
};

inline constexpr double kHoverHeight = 0.15;
inline constexpr double kPrimTol = 0.01;

// Runs one primitive to completion through step_atomic. Controllers are
// proportional: reach transits closed along a lift/hover/lower profile, grasp
// transits open and closes at the target pose, push transits open then sweeps
// by its displacement, release opens in place, atomic issues its parameters
// as a single command. Never exceeds the primitive's step budget and always
// consumes at least one atomic step.
PrimitiveOutcome execute_primitive(WorldState& state,
                                   const PrimitiveLibrary& lib,
                                   const ParameterizedAction& act,
                                   const TaskDef& task);

}  // namespace maple
