#pragma once

#include <functional>
#include <vector>

#include "maple/core.hpp"
#include "maple/primitives.hpp"
#include "maple/sim.hpp"

namespace maple {

// Reward shaping that scores whether a primitive's target position engages
// anything useful in the scene. Thresholds are per primitive family; the
// keypoint provider is usually TaskDef::keypoints.
struct AffordanceSpec {
  double tau_reach = 0.06;
  double tau_grasp = 0.03;
  double tau_push = 0.12;
  double scale = 3.0;  // weight added to the decision reward
  std::function<std::vector<Vec3>(const WorldState&, PrimitiveId)> keypoints;

  double tau_for(PrimitiveId id) const;
};

// Score in [0, 1]. Positional primitives score
//   max over keypoints p of 1 - tanh(max(|x_reach - p| - tau, 0))
// where x_reach is the first three scaled parameters; the score is 0 when
// the state offers no keypoints for that primitive. Release and Atomic are
// always considered afforded and score 1.
double affordance_score(const WorldState& state, const PrimitiveLibrary& lib,
                        const ParameterizedAction& act,
                        const AffordanceSpec& spec);

}  // namespace maple
