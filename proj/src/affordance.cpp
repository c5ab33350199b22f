#include "maple/affordance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maple {

double AffordanceSpec::tau_for(PrimitiveId id) const {
  switch (id) {
    case PrimitiveId::Reach:
      return tau_reach;
    case PrimitiveId::Grasp:
      return tau_grasp;
    case PrimitiveId::Push:
      return tau_push;
    default:
      throw std::invalid_argument("primitive has no affordance threshold");
  }
}

double affordance_score(const WorldState& state, const PrimitiveLibrary& lib,
                        const ParameterizedAction& act,
                        const AffordanceSpec& spec) {
  PrimitiveId id = lib.spec(act.type).id;
  if (id == PrimitiveId::Release || id == PrimitiveId::Atomic) return 1.0;

  std::vector<Vec3> points =
      spec.keypoints ? spec.keypoints(state, id) : std::vector<Vec3>{};
  if (points.empty()) return 0.0;

  Vec eff = lib.truncate_params(act.params, act.type);
  Vec3 x_reach(eff[0], eff[1], eff[2]);
  double tau = spec.tau_for(id);
  double best = 0.0;
  for (const Vec3& p : points) {
    double slack = std::max((x_reach - p).norm() - tau, 0.0);
    best = std::max(best, 1.0 - std::tanh(slack));
  }
  return best;
}

}  // namespace maple
