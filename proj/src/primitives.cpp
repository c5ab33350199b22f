#include "maple/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace maple {
namespace {

double toward(double cur, double tgt, double max_step) {
  return std::clamp((tgt - cur) / max_step, -1.0, 1.0);
}

struct Runner {
  WorldState& s;
  const TaskDef& task;
  int budget;
  PrimitiveOutcome out;

  bool exhausted() const { return out.atomic_steps >= budget; }

  // Steps the world once; returns true when the caller must stop.
  bool emit(const AtomicAction& u) {
    double r = step_atomic(s, u, task);
    out.reward_sum += r;
    out.step_rewards.push_back(r);
    out.actions.push_back(u);
    out.atomic_steps += 1;
    if (task.success && task.success(s)) out.success_seen = true;
    return exhausted();
  }
};

// Shared transit profile: rise to the hover plane, translate, then descend
// onto the target. grip is the gripper command held throughout, yaw_tgt nan
// to leave the wrist alone.
bool transit(Runner& r, const Vec3& tgt, double grip, double yaw_tgt) {
  while (!r.exhausted()) {
    const Vec3& p = r.s.gripper_pos;
    double yaw_u = std::isnan(yaw_tgt)
                       ? 0.0
                       : std::clamp(wrap_angle(yaw_tgt - r.s.gripper_yaw) /
                                        kMaxYawStep,
                                    -1.0, 1.0);
    double dist = (p - tgt).norm();
    bool yaw_ok = std::isnan(yaw_tgt) ||
                  std::abs(wrap_angle(yaw_tgt - r.s.gripper_yaw)) <= 0.05;
    if (dist <= kPrimTol && yaw_ok) return false;  // arrived

    double dxy = std::hypot(p.x() - tgt.x(), p.y() - tgt.y());
    AtomicAction u;
    if (dxy > 0.005) {
      if (p.z() < kHoverHeight - 1e-9 && p.z() < kGripperZMax - 1e-9) {
        u.u = {0, 0, toward(p.z(), kHoverHeight, kMaxPosStep), yaw_u, grip};
      } else {
        u.u = {toward(p.x(), tgt.x(), kMaxPosStep),
               toward(p.y(), tgt.y(), kMaxPosStep), 0, yaw_u, grip};
      }
    } else {
      u.u = {toward(p.x(), tgt.x(), kMaxPosStep),
             toward(p.y(), tgt.y(), kMaxPosStep),
             toward(p.z(), tgt.z(), kMaxPosStep), yaw_u, grip};
    }
    if (r.emit(u)) return true;
  }
  return true;
}

void run_reach(Runner& r, const Vec& eff) {
  transit(r, Vec3(eff[0], eff[1], eff[2]), -1.0,
          std::numeric_limits<double>::quiet_NaN());
  r.out.reached_target = (r.s.gripper_pos - Vec3(eff[0], eff[1], eff[2])).norm() <= kPrimTol;
}

void run_grasp(Runner& r, const Vec& eff) {
  Vec3 tgt(eff[0], eff[1], eff[2]);
  if (transit(r, tgt, 1.0, eff[3])) return;
  AtomicAction close;
  close.u = {0, 0, 0, 0, -1.0};
  r.emit(close);
  r.out.reached_target = true;
}

void run_push(Runner& r, const Vec& eff) {
  Vec3 start(eff[0], eff[1], eff[2]);
  if (transit(r, start, 1.0, eff[3])) return;
  Vec3 tgt = start + Vec3(eff[4], eff[5], eff[6]);
  tgt.x() = std::clamp(tgt.x(), -kWorkspaceXY, kWorkspaceXY);
  tgt.y() = std::clamp(tgt.y(), -kWorkspaceXY, kWorkspaceXY);
  tgt.z() = std::clamp(tgt.z(), kGripperZMin, kGripperZMax);
  while (!r.exhausted()) {
    const Vec3& p = r.s.gripper_pos;
    if ((p - tgt).norm() <= kPrimTol) {
      r.out.reached_target = true;
      return;
    }
    AtomicAction u;
    u.u = {toward(p.x(), tgt.x(), kMaxPosStep),
           toward(p.y(), tgt.y(), kMaxPosStep),
           toward(p.z(), tgt.z(), kMaxPosStep), 0, 1.0};
    if (r.emit(u)) return;
  }
}

void run_release(Runner& r) {
  AtomicAction open;
  open.u = {0, 0, 0, 0, 1.0};
  for (int i = 0; i < 4; ++i)
    if (r.emit(open)) break;
  r.out.reached_target = true;
}

void run_atomic(Runner& r, const Vec& eff) {
  AtomicAction u(eff);
  r.emit(u);
  r.out.reached_target = true;
}

}  // namespace

PrimitiveOutcome execute_primitive(WorldState& state,
                                   const PrimitiveLibrary& lib,
                                   const ParameterizedAction& act,
                                   const TaskDef& task) {
  const PrimitiveSpec& spec = lib.spec(act.type);
  Vec eff = lib.truncate_params(act.params, act.type);
  Runner r{state, task, spec.max_atomic_steps, {}};
  switch (spec.id) {
    case PrimitiveId::Reach:
      run_reach(r, eff);
      break;
    case PrimitiveId::Grasp:
      run_grasp(r, eff);
      break;
    case PrimitiveId::Push:
      run_push(r, eff);
      break;
    case PrimitiveId::Release:
      run_release(r);
      break;
    case PrimitiveId::Atomic:
      run_atomic(r, eff);
      break;
  }
  if (r.out.atomic_steps == 0) {
    // A controller whose target is already satisfied still burns one control
    // tick; otherwise a policy repeating such a decision would stall a
    // step-capped episode forever.
    AtomicAction hold;
    hold.u = {0, 0, 0, 0, state.gripper_open ? 1.0 : -1.0};
    r.emit(hold);
  }
  return r.out;
}

}  // namespace maple
