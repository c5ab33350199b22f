#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "maple/core.hpp"

namespace maple {

// Tabletop workspace. z = 0 is the table surface.
inline constexpr double kWorkspaceXY = 0.15;
inline constexpr double kGripperZMin = 0.01;
inline constexpr double kGripperZMax = 0.25;
inline constexpr double kMaxPosStep = 0.02;   // metres per atomic step, per axis
inline constexpr double kMaxYawStep = 0.1;    // radians per atomic step
inline constexpr double kGraspRadius = 0.02;  // metres
inline constexpr double kGraspYawTol = 0.25;  // radians
// Boxes whose footprint fits well inside the jaw opening are swept into
// alignment as the fingers close, so their grasps ignore the wrist angle.
inline constexpr double kYawFreeGraspHalf = 0.02;
inline constexpr double kPushMargin = 0.01;   // contact margin around footprints
inline constexpr double kPushZSlack = 0.005;  // gripper may ride this high above an object it pushes

struct ObjectBody {
  std::string name;
  Vec3 pos = Vec3::Zero();  // centre of mass
  double yaw = 0.0;
  bool cylinder = false;  // box otherwise
  Vec3 half = Vec3::Zero();  // box half extents; cylinder: half.x() radius, half.z() half height
  bool graspable = false;
  bool pushable = false;

  double top() const { return pos.z() + half.z(); }
  double bottom() const { return pos.z() - half.z(); }
};

struct BinFixture {
  bool present = false;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d half = Eigen::Vector2d::Zero();
};

struct CornerFixture {
  bool present = false;
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  double radius = 0.05;
};

// A static block with a vertical hole bored through its top face. Descending
// into the hole requires horizontal alignment within `clearance` of the axis
// and a per-step descent no larger than `speed_limit`; faster approaches jam
// against the top face.
struct HoleFixture {
  bool present = false;
  Eigen::Vector2d block_center = Eigen::Vector2d::Zero();
  Eigen::Vector2d block_half = Eigen::Vector2d::Zero();
  double block_top = 0.0;
  double clearance = 0.004;
  double depth = 0.04;
  double insert_depth = 0.02;  // insertion counted a success at this depth
  double speed_limit = 0.005;  // max per-step descent through the mouth
};

struct WorldState {
  Vec3 gripper_pos = Vec3(0.0, 0.0, 0.12);
  double gripper_yaw = 0.0;
  bool gripper_open = true;
  int held = -1;  // index into objects, -1 when empty
  Vec3 held_offset = Vec3::Zero();  // object pos - gripper pos at attach time
  double held_yaw_offset = 0.0;
  std::vector<ObjectBody> objects;
  BinFixture bin;
  CornerFixture corner;
  HoleFixture hole;
  int atomic_timer = 0;

  const ObjectBody* find(const std::string& name) const;
  ObjectBody* find(const std::string& name);
  bool holding(int index) const { return held == index; }
};

// Everything an experiment needs to know about one task. Rewards are dense,
// bounded by r_max, and equal to r_max exactly on success.
struct TaskDef {
  std::string name;
  int episode_cap = 150;
  double r_max = 1.0;
  int obs_dim = 0;
  ParamBounds bounds = ParamBounds::defaults();
  std::function<WorldState(uint64_t seed)> reset;
  std::function<Vec(const WorldState&)> observe;
  std::function<double(const WorldState&)> dense_reward;
  std::function<bool(const WorldState&)> success;
  // Workspace points the given primitive should engage with from this state.
  std::function<std::vector<Vec3>(const WorldState&, PrimitiveId)> keypoints;
};

double wrap_angle(double a);  // into (-pi, pi]

// Advances the world by one atomic command and returns the dense reward of
// the resulting state. Motion is kinematic: the gripper moves up to
// kMaxPosStep per axis, a held object follows rigidly (subject to the hole
// fixture's entry rules), opening drops the held object onto whatever is
// under it, closing near a graspable object attaches it, and an open gripper
// overlapping a pushable object drags it horizontally.
double step_atomic(WorldState& state, const AtomicAction& u, const TaskDef& task);

}  // namespace maple
