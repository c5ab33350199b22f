#include "maple/sim.hpp"

#include <algorithm>
#include <cmath>

namespace maple {

const ObjectBody* WorldState::find(const std::string& name) const {
  for (const auto& o : objects)
    if (o.name == name) return &o;
  return nullptr;
}

ObjectBody* WorldState::find(const std::string& name) {
  for (auto& o : objects)
    if (o.name == name) return &o;
  return nullptr;
}

double wrap_angle(double a) {
  const double two_pi = 2.0 * M_PI;
  a = std::fmod(a + M_PI, two_pi);
  if (a < 0) a += two_pi;
  return a - M_PI;
}

static Vec3 clamp_gripper(Vec3 p) {
  p.x() = std::clamp(p.x(), -kWorkspaceXY, kWorkspaceXY);
  p.y() = std::clamp(p.y(), -kWorkspaceXY, kWorkspaceXY);
  p.z() = std::clamp(p.z(), kGripperZMin, kGripperZMax);
  return p;
}

static bool footprint_contains(const ObjectBody& o, double x, double y) {
  if (o.cylinder) {
    return std::hypot(x - o.pos.x(), y - o.pos.y()) <= o.half.x();
  }
  return std::abs(x - o.pos.x()) <= o.half.x() &&
         std::abs(y - o.pos.y()) <= o.half.y();
}

static bool block_contains(const HoleFixture& h, double x, double y) {
  return std::abs(x - h.block_center.x()) <= h.block_half.x() &&
         std::abs(y - h.block_center.y()) <= h.block_half.y();
}

// Height the centre of `obj` would settle at if released at (x, y): the table,
// the top of whatever object lies under it, or the hole floor when a cylinder
// sits aligned over the hole.
static double rest_height(const WorldState& s, int obj_index, double x,
                          double y) {
  const ObjectBody& obj = s.objects[static_cast<size_t>(obj_index)];
  double base = 0.0;
  for (int i = 0; i < static_cast<int>(s.objects.size()); ++i) {
    if (i == obj_index || s.held == i) continue;
    const ObjectBody& q = s.objects[static_cast<size_t>(i)];
    if (footprint_contains(q, x, y)) base = std::max(base, q.top());
  }
  if (s.hole.present && block_contains(s.hole, x, y)) {
    double dx = x - s.hole.block_center.x();
    double dy = y - s.hole.block_center.y();
    bool down_hole = obj.cylinder && std::hypot(dx, dy) <= s.hole.clearance;
    base = std::max(base, down_hole ? s.hole.block_top - s.hole.depth
                                    : s.hole.block_top);
  }
  return base + obj.half.z();
}

// Keeps a held object from passing through the hole block. Entry through the
// mouth needs alignment within the clearance and a gentle per-step descent;
// once inside, the shaft confines xy and the floor stops z.
static Vec3 constrain_held(const WorldState& s, const ObjectBody& obj,
                           const Vec3& desired) {
  if (!s.hole.present) return desired;
  const HoleFixture& h = s.hole;
  Vec3 p = desired;
  double hz = obj.half.z();
  double tip_old = obj.pos.z() - hz;
  double floor_z = h.block_top - h.depth + hz;

  if (tip_old < h.block_top - 1e-12) {
    // Already inside the shaft.
    double dx = p.x() - h.block_center.x();
    double dy = p.y() - h.block_center.y();
    double r = std::hypot(dx, dy);
    if (r > h.clearance && r > 0) {
      double scale = h.clearance / r;
      p.x() = h.block_center.x() + dx * scale;
      p.y() = h.block_center.y() + dy * scale;
    }
    p.z() = std::max(p.z(), floor_z);
    return p;
  }

  if (block_contains(h, p.x(), p.y()) && p.z() - hz < h.block_top) {
    bool aligned = obj.cylinder &&
                   std::hypot(p.x() - h.block_center.x(),
                              p.y() - h.block_center.y()) <= h.clearance;
    bool gentle = obj.pos.z() - p.z() <= h.speed_limit + 1e-12;
    if (aligned && gentle) {
      p.z() = std::max(p.z(), floor_z);
    } else {
      p.z() = h.block_top + hz;  // jams on the top face
    }
  }
  return p;
}

double step_atomic(WorldState& s, const AtomicAction& u, const TaskDef& task) {
  const bool open_before = s.gripper_open;
  const Vec3 old_pos = s.gripper_pos;

  Vec3 target = s.gripper_pos + Vec3(u.dx(), u.dy(), u.dz()) * kMaxPosStep;
  target = clamp_gripper(target);
  double new_yaw = wrap_angle(s.gripper_yaw + u.dyaw() * kMaxYawStep);

  if (s.held >= 0) {
    ObjectBody& obj = s.objects[static_cast<size_t>(s.held)];
    Vec3 obj_target = constrain_held(s, obj, target + s.held_offset);
    obj.pos = obj_target;
    obj.yaw = wrap_angle(new_yaw + s.held_yaw_offset);
    s.gripper_pos = obj_target - s.held_offset;
  } else {
    s.gripper_pos = target;
  }
  s.gripper_yaw = new_yaw;

  if (u.grip() >= 0.0) {
    if (s.held >= 0) {
      ObjectBody& obj = s.objects[static_cast<size_t>(s.held)];
      int idx = s.held;
      s.held = -1;
      obj.pos.z() = rest_height(s, idx, obj.pos.x(), obj.pos.y());
    }
    s.gripper_open = true;
  } else if (s.gripper_open) {
    s.gripper_open = false;
    // Attach the nearest graspable object within reach. Large boxes need a
    // wrist angle compatible with some graspable orientation: a parallel jaw
    // closes across either pair of opposite faces, so rectangular boxes
    // repeat every pi and square cross-sections every pi/2. Small boxes and
    // cylinders attach at any angle.
    int best = -1;
    double best_d = kGraspRadius;
    for (int i = 0; i < static_cast<int>(s.objects.size()); ++i) {
      const ObjectBody& o = s.objects[static_cast<size_t>(i)];
      if (!o.graspable) continue;
      if (!o.cylinder &&
          std::max(o.half.x(), o.half.y()) > kYawFreeGraspHalf) {
        double period = o.half.x() == o.half.y() ? M_PI / 2.0 : M_PI;
        double d = std::fmod(std::abs(wrap_angle(s.gripper_yaw - o.yaw)),
                             period);
        if (std::min(d, period - d) > kGraspYawTol) continue;
      }
      double d = (o.pos - s.gripper_pos).norm();
      if (d <= best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best >= 0) {
      const ObjectBody& o = s.objects[static_cast<size_t>(best)];
      s.held = best;
      s.held_offset = o.pos - s.gripper_pos;
      s.held_yaw_offset = wrap_angle(o.yaw - s.gripper_yaw);
    }
  }

  // An open gripper drags pushable objects it overlaps.
  if (open_before && s.gripper_open) {
    double dx = s.gripper_pos.x() - old_pos.x();
    double dy = s.gripper_pos.y() - old_pos.y();
    if (dx != 0.0 || dy != 0.0) {
      for (int i = 0; i < static_cast<int>(s.objects.size()); ++i) {
        ObjectBody& o = s.objects[static_cast<size_t>(i)];
        if (!o.pushable || s.held == i) continue;
        if (s.gripper_pos.z() > o.top() + kPushZSlack) continue;
        bool contact;
        if (o.cylinder) {
          contact = std::hypot(s.gripper_pos.x() - o.pos.x(),
                               s.gripper_pos.y() - o.pos.y()) <=
                    o.half.x() + kPushMargin;
        } else {
          contact = std::abs(s.gripper_pos.x() - o.pos.x()) <=
                        o.half.x() + kPushMargin &&
                    std::abs(s.gripper_pos.y() - o.pos.y()) <=
                        o.half.y() + kPushMargin;
        }
        if (contact) {
          o.pos.x() = std::clamp(o.pos.x() + dx, -kWorkspaceXY, kWorkspaceXY);
          o.pos.y() = std::clamp(o.pos.y() + dy, -kWorkspaceXY, kWorkspaceXY);
        }
      }
    }
  }

  s.atomic_timer += 1;
  return task.dense_reward ? task.dense_reward(s) : 0.0;
}

}  // namespace maple
