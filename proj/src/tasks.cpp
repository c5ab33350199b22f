#include "maple/tasks.hpp"

#include <cmath>
#include <stdexcept>

#include "maple/rng.hpp"

namespace maple {
namespace {

double u01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * u01(g);
}

// 1 at zero distance, decaying towards 0; k sets how tight the basin is.
double near(double dist, double k = 10.0) { return 1.0 - std::tanh(k * dist); }

bool resting(const ObjectBody& o) { return o.pos.z() <= o.half.z() + 1e-6; }

bool in_bin(const ObjectBody& o, const BinFixture& bin, bool is_held) {
  return bin.present && !is_held && resting(o) &&
         std::abs(o.pos.x() - bin.center.x()) <= bin.half.x() &&
         std::abs(o.pos.y() - bin.center.y()) <= bin.half.y();
}

// Observation fragment for one object: pose, held flag, offset from gripper.
void push_object_obs(std::vector<double>& v, const WorldState& s,
                     const ObjectBody& o, bool is_held) {
  v.push_back(o.pos.x());
  v.push_back(o.pos.y());
  v.push_back(o.pos.z());
  v.push_back(o.yaw);
  v.push_back(is_held ? 1.0 : 0.0);
  v.push_back(o.pos.x() - s.gripper_pos.x());
  v.push_back(o.pos.y() - s.gripper_pos.y());
  v.push_back(o.pos.z() - s.gripper_pos.z());
}

void push_gripper_obs(std::vector<double>& v, const WorldState& s) {
  v.push_back(s.gripper_pos.x());
  v.push_back(s.gripper_pos.y());
  v.push_back(s.gripper_pos.z());
  v.push_back(s.gripper_yaw);
  v.push_back(s.gripper_open ? 1.0 : 0.0);
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

ObjectBody make_box(const std::string& name, const Vec3& half, bool graspable,
                    bool pushable) {
  ObjectBody o;
  o.name = name;
  o.half = half;
  o.graspable = graspable;
  o.pushable = pushable;
  return o;
}

ObjectBody make_cylinder(const std::string& name, double radius,
                         double half_height, bool graspable, bool pushable) {
  ObjectBody o;
  o.name = name;
  o.cylinder = true;
  o.half = Vec3(radius, radius, half_height);
  o.graspable = graspable;
  o.pushable = pushable;
  return o;
}

void place_on_table(ObjectBody& o, double x, double y) {
  o.pos = Vec3(x, y, o.half.z());
}

std::vector<Vec3> graspable_positions(const WorldState& s) {
  std::vector<Vec3> p;
  for (int i = 0; i < static_cast<int>(s.objects.size()); ++i) {
    const ObjectBody& o = s.objects[static_cast<size_t>(i)];
    if (o.graspable && s.held != i) p.push_back(o.pos);
  }
  return p;
}

std::vector<Vec3> pushable_positions(const WorldState& s) {
  std::vector<Vec3> p;
  for (int i = 0; i < static_cast<int>(s.objects.size()); ++i) {
    const ObjectBody& o = s.objects[static_cast<size_t>(i)];
    if (o.pushable && s.held != i) p.push_back(o.pos);
  }
  return p;
}

constexpr double kLiftHeight = 0.10;
constexpr double kBinHover = 0.08;

TaskDef lift_task() {
  TaskDef t;
  t.name = "lift";
  t.obs_dim = 13;
  t.reset = [](uint64_t seed) {
    std::mt19937_64 g(splitmix64(seed));
    WorldState s;
    ObjectBody cube = make_box("cube", Vec3(0.02, 0.02, 0.02), true, false);
    place_on_table(cube, uniform(g, -0.08, 0.08), uniform(g, -0.08, 0.08));
    s.objects.push_back(cube);
    return s;
  };
  t.observe = [](const WorldState& s) {
    std::vector<double> v;
    push_gripper_obs(v, s);
    push_object_obs(v, s, s.objects[0], s.held == 0);
    return to_vec(v);
  };
  t.success = [](const WorldState& s) {
    return s.objects[0].pos.z() >= kLiftHeight;
  };
  t.dense_reward = [](const WorldState& s) {
    const ObjectBody& cube = s.objects[0];
    if (cube.pos.z() >= kLiftHeight) return 1.0;
    if (s.held == 0) {
      double rest = cube.half.z();
      double frac =
          std::clamp((cube.pos.z() - rest) / (kLiftHeight - rest), 0.0, 1.0);
      return 0.5 + 0.5 * frac;
    }
    return 0.25 * near((cube.pos - s.gripper_pos).norm());
  };
  t.keypoints = [](const WorldState& s, PrimitiveId p) -> std::vector<Vec3> {
    switch (p) {
      case PrimitiveId::Grasp:
        return graspable_positions(s);
      case PrimitiveId::Push:
        return pushable_positions(s);
      case PrimitiveId::Reach:
        if (s.held == 0) {
          const ObjectBody& cube = s.objects[0];
          return {Vec3(cube.pos.x(), cube.pos.y(), kLiftHeight + 0.03) -
                  s.held_offset};
        }
        return {};
      default:
        return {};
    }
  };
  return t;
}

TaskDef stack_task() {
  TaskDef t;
  t.name = "stack";
  t.obs_dim = 21;
  t.reset = [](uint64_t seed) {
    std::mt19937_64 g(splitmix64(seed));
    WorldState s;
    ObjectBody small =
        make_box("small", Vec3(0.017, 0.017, 0.017), true, false);
    ObjectBody large =
        make_box("large", Vec3(0.025, 0.025, 0.025), true, false);
    while (true) {
      double sx = uniform(g, -0.09, 0.09), sy = uniform(g, -0.09, 0.09);
      double lx = uniform(g, -0.09, 0.09), ly = uniform(g, -0.09, 0.09);
      if (std::hypot(sx - lx, sy - ly) < 0.07) continue;
      place_on_table(small, sx, sy);
      place_on_table(large, lx, ly);
      break;
    }
    s.objects.push_back(small);
    s.objects.push_back(large);
    return s;
  };
  t.observe = [](const WorldState& s) {
    std::vector<double> v;
    push_gripper_obs(v, s);
    push_object_obs(v, s, s.objects[0], s.held == 0);
    push_object_obs(v, s, s.objects[1], s.held == 1);
    return to_vec(v);
  };
  auto place_point = [](const WorldState& s) {
    const ObjectBody& small = s.objects[0];
    const ObjectBody& large = s.objects[1];
    return Vec3(large.pos.x(), large.pos.y(), large.top() + small.half.z());
  };
  t.success = [place_point](const WorldState& s) {
    const ObjectBody& small = s.objects[0];
    Vec3 place = place_point(s);
    return s.held != 0 &&
           std::hypot(small.pos.x() - place.x(), small.pos.y() - place.y()) <=
               0.015 &&
           std::abs(small.pos.z() - place.z()) <= 0.005;
  };
  t.dense_reward = [place_point, success = t.success](const WorldState& s) {
    if (success(s)) return 1.0;
    const ObjectBody& small = s.objects[0];
    if (s.held == 0)
      return 0.5 + 0.25 * near((small.pos - place_point(s)).norm());
    return 0.25 * near((small.pos - s.gripper_pos).norm());
  };
  t.keypoints = [place_point](const WorldState& s,
                              PrimitiveId p) -> std::vector<Vec3> {
    switch (p) {
      case PrimitiveId::Grasp:
        return graspable_positions(s);
      case PrimitiveId::Push:
        return pushable_positions(s);
      case PrimitiveId::Reach:
        if (s.held == 0)
          return {place_point(s) + Vec3(0, 0, 0.004) - s.held_offset};
        return {};
      default:
        return {};
    }
  };
  return t;
}

TaskDef pick_place_task(const std::string& name, bool bread) {
  TaskDef t;
  t.name = name;
  t.obs_dim = 15;
  Eigen::Vector2d bin_center =
      bread ? Eigen::Vector2d(0.09, -0.06) : Eigen::Vector2d(0.09, 0.06);
  t.reset = [bread, bin_center](uint64_t seed) {
    std::mt19937_64 g(splitmix64(seed));
    WorldState s;
    ObjectBody obj =
        bread ? make_box("bread", Vec3(0.02, 0.015, 0.015), true, false)
              : make_cylinder("can", 0.015, 0.025, true, false);
    place_on_table(obj, uniform(g, -0.10, -0.02), uniform(g, -0.08, 0.08));
    s.objects.push_back(obj);
    s.bin.present = true;
    s.bin.center = bin_center;
    s.bin.half = Eigen::Vector2d(0.04, 0.04);
    return s;
  };
  t.observe = [](const WorldState& s) {
    std::vector<double> v;
    push_gripper_obs(v, s);
    push_object_obs(v, s, s.objects[0], s.held == 0);
    v.push_back(s.bin.center.x() - s.objects[0].pos.x());
    v.push_back(s.bin.center.y() - s.objects[0].pos.y());
    return to_vec(v);
  };
  t.success = [](const WorldState& s) {
    return in_bin(s.objects[0], s.bin, s.held == 0);
  };
  t.dense_reward = [](const WorldState& s) {
    const ObjectBody& obj = s.objects[0];
    if (in_bin(obj, s.bin, s.held == 0)) return 1.0;
    if (s.held == 0) {
      Vec3 hover(s.bin.center.x(), s.bin.center.y(), kBinHover);
      return 0.5 + 0.25 * near((obj.pos - hover).norm());
    }
    return 0.25 * near((obj.pos - s.gripper_pos).norm());
  };
  t.keypoints = [](const WorldState& s, PrimitiveId p) -> std::vector<Vec3> {
    switch (p) {
      case PrimitiveId::Grasp:
        return graspable_positions(s);
      case PrimitiveId::Push:
        return pushable_positions(s);
      case PrimitiveId::Reach:
        if (s.held == 0)
          return {Vec3(s.bin.center.x(), s.bin.center.y(), kBinHover) -
                  s.held_offset};
        return {};
      default:
        return {};
    }
  };
  return t;
}

TaskDef cleanup_task() {
  TaskDef t;
  t.name = "cleanup";
  t.obs_dim = 25;
  t.reset = [](uint64_t seed) {
    std::mt19937_64 g(splitmix64(seed));
    WorldState s;
    ObjectBody spam = make_cylinder("spam", 0.015, 0.025, true, false);
    ObjectBody jello = make_box("jello", Vec3(0.02, 0.02, 0.012), false, true);
    while (true) {
      double sx = uniform(g, -0.06, 0.0), sy = uniform(g, -0.08, -0.02);
      double jx = uniform(g, 0.0, 0.06), jy = uniform(g, 0.0, 0.06);
      if (std::hypot(sx - jx, sy - jy) < 0.06) continue;
      place_on_table(spam, sx, sy);
      place_on_table(jello, jx, jy);
      break;
    }
    s.objects.push_back(spam);
    s.objects.push_back(jello);
    s.bin.present = true;
    s.bin.center = Eigen::Vector2d(-0.09, 0.09);
    s.bin.half = Eigen::Vector2d(0.04, 0.04);
    s.corner.present = true;
    s.corner.target = Eigen::Vector2d(0.12, 0.12);
    s.corner.radius = 0.05;
    return s;
  };
  t.observe = [](const WorldState& s) {
    std::vector<double> v;
    push_gripper_obs(v, s);
    push_object_obs(v, s, s.objects[0], s.held == 0);
    push_object_obs(v, s, s.objects[1], s.held == 1);
    v.push_back(s.bin.center.x() - s.objects[0].pos.x());
    v.push_back(s.bin.center.y() - s.objects[0].pos.y());
    v.push_back(s.corner.target.x() - s.objects[1].pos.x());
    v.push_back(s.corner.target.y() - s.objects[1].pos.y());
    return to_vec(v);
  };
  auto spam_done = [](const WorldState& s) {
    return in_bin(s.objects[0], s.bin, s.held == 0);
  };
  auto jello_done = [](const WorldState& s) {
    const ObjectBody& j = s.objects[1];
    return std::hypot(j.pos.x() - s.corner.target.x(),
                      j.pos.y() - s.corner.target.y()) <= s.corner.radius;
  };
  t.success = [spam_done, jello_done](const WorldState& s) {
    return spam_done(s) && jello_done(s);
  };
  t.dense_reward = [spam_done, jello_done](const WorldState& s) {
    const ObjectBody& spam = s.objects[0];
    const ObjectBody& jello = s.objects[1];
    double sub_spam;
    if (spam_done(s)) {
      sub_spam = 1.0;
    } else if (s.held == 0) {
      Vec3 hover(s.bin.center.x(), s.bin.center.y(), kBinHover);
      sub_spam = 0.5 + 0.25 * near((spam.pos - hover).norm());
    } else {
      sub_spam = 0.25 * near((spam.pos - s.gripper_pos).norm());
    }
    double sub_jello;
    if (jello_done(s)) {
      sub_jello = 1.0;
    } else {
      double to_corner = std::hypot(jello.pos.x() - s.corner.target.x(),
                                    jello.pos.y() - s.corner.target.y());
      sub_jello = 0.25 * near((jello.pos - s.gripper_pos).norm()) +
                  0.5 * near(to_corner);
    }
    return 0.5 * (sub_spam + sub_jello);
  };
  t.keypoints = [](const WorldState& s, PrimitiveId p) -> std::vector<Vec3> {
    switch (p) {
      case PrimitiveId::Grasp:
        return graspable_positions(s);
      case PrimitiveId::Push:
        return pushable_positions(s);
      case PrimitiveId::Reach:
        if (s.held == 0)
          return {Vec3(s.bin.center.x(), s.bin.center.y(), kBinHover) -
                  s.held_offset};
        return {};
      default:
        return {};
    }
  };
  return t;
}

TaskDef peg_task() {
  TaskDef t;
  t.name = "peg";
  t.obs_dim = 16;
  t.reset = [](uint64_t seed) {
    std::mt19937_64 g(splitmix64(seed));
    WorldState s;
    ObjectBody peg = make_cylinder("peg", 0.008, 0.03, true, false);
    place_on_table(peg, uniform(g, -0.10, -0.02), uniform(g, -0.06, 0.06));
    s.objects.push_back(peg);
    s.hole.present = true;
    s.hole.block_center = Eigen::Vector2d(0.08, 0.0);
    s.hole.block_half = Eigen::Vector2d(0.035, 0.035);
    s.hole.block_top = 0.06;
    s.hole.clearance = 0.004;
    s.hole.depth = 0.04;
    s.hole.insert_depth = 0.02;
    s.hole.speed_limit = 0.005;
    return s;
  };
  t.observe = [](const WorldState& s) {
    const ObjectBody& peg = s.objects[0];
    std::vector<double> v;
    push_gripper_obs(v, s);
    push_object_obs(v, s, peg, s.held == 0);
    v.push_back(s.hole.block_center.x() - peg.pos.x());
    v.push_back(s.hole.block_center.y() - peg.pos.y());
    v.push_back(s.hole.block_top - peg.bottom());
    return to_vec(v);
  };
  auto depth_of = [](const WorldState& s) {
    return s.hole.block_top - s.objects[0].bottom();
  };
  t.success = [depth_of](const WorldState& s) {
    return depth_of(s) >= s.hole.insert_depth;
  };
  t.dense_reward = [depth_of](const WorldState& s) {
    const ObjectBody& peg = s.objects[0];
    double depth = depth_of(s);
    if (depth >= s.hole.insert_depth) return 1.0;
    if (s.held == 0) {
      if (depth > 0)
        return 0.75 + 0.25 * std::clamp(depth / s.hole.insert_depth, 0.0, 1.0);
      Vec3 tip(peg.pos.x(), peg.pos.y(), peg.bottom());
      Vec3 mouth(s.hole.block_center.x(), s.hole.block_center.y(),
                 s.hole.block_top);
      return 0.5 + 0.25 * near((tip - mouth).norm(), 20.0);
    }
    return 0.25 * near((peg.pos - s.gripper_pos).norm());
  };
  t.keypoints = [](const WorldState& s, PrimitiveId p) -> std::vector<Vec3> {
    switch (p) {
      case PrimitiveId::Grasp:
        return graspable_positions(s);
      case PrimitiveId::Push:
        return pushable_positions(s);
      case PrimitiveId::Reach:
        if (s.held == 0) {
          const ObjectBody& peg = s.objects[0];
          return {Vec3(s.hole.block_center.x(), s.hole.block_center.y(),
                       s.hole.block_top + peg.half.z() + 0.01) -
                  s.held_offset};
        }
        return {};
      default:
        return {};
    }
  };
  return t;
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {"lift", "stack", "pnp",
                                                 "pnp_bread", "cleanup", "peg"};
  return names;
}

TaskDef make_task(const std::string& name) {
  if (name == "lift") return lift_task();
  if (name == "stack") return stack_task();
  if (name == "pnp") return pick_place_task("pnp", false);
  if (name == "pnp_bread") return pick_place_task("pnp_bread", true);
  if (name == "cleanup") return cleanup_task();
  if (name == "peg") return peg_task();
  throw std::invalid_argument("unknown task: " + name);
}

}  // namespace maple
