#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace maple {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

// Control dimension of one atomic command: dx, dy, dz, dyaw, gripper.
inline constexpr int kControlDim = 5;

enum class PrimitiveId { Reach, Grasp, Push, Release, Atomic };

const char* primitive_name(PrimitiveId id);
PrimitiveId primitive_from_name(const std::string& name);

// One low-level command. All components are clamped to [-1, 1] on
// construction; the simulator scales them to physical step sizes.
struct AtomicAction {
  std::array<double, kControlDim> u{};

  AtomicAction() = default;
  explicit AtomicAction(const std::array<double, kControlDim>& raw);
  explicit AtomicAction(const Vec& raw);

  double dx() const { return u[0]; }
  double dy() const { return u[1]; }
  double dz() const { return u[2]; }
  double dyaw() const { return u[3]; }
  double grip() const { return u[4]; }  // >= 0 opens, < 0 closes
};

// Closed interval for one scaled parameter dimension.
struct ParamRange {
  double lo = -1.0;
  double hi = 1.0;
};

// Static description of one primitive: how many of the shared parameter
// dimensions it consumes, how those map to physical ranges, and how many
// atomic steps one execution may take.
struct PrimitiveSpec {
  PrimitiveId id = PrimitiveId::Atomic;
  int param_dim = 0;
  int max_atomic_steps = 1;
  std::vector<ParamRange> bounds;  // size == param_dim
};

// Parameter ranges a task exposes per primitive. Position entries are in
// workspace coordinates (metres), yaw in radians.
struct ParamBounds {
  std::vector<ParamRange> reach;  // x, y, z
  std::vector<ParamRange> grasp;  // x, y, z, yaw
  std::vector<ParamRange> push;   // x, y, z, yaw, dx, dy, dz

  static ParamBounds defaults();
};

// The set of primitives an agent may choose from. Parameter vectors handed
// to the library always have max_param_dim() entries; each primitive uses a
// prefix of them.
class PrimitiveLibrary {
 public:
  PrimitiveLibrary() = default;
  explicit PrimitiveLibrary(std::vector<PrimitiveSpec> specs);

  // Reach, Grasp, Push, Release, Atomic with the given scaled ranges.
  static PrimitiveLibrary full(const ParamBounds& bounds);
  // Reach, Grasp, Push, Release (no Atomic).
  static PrimitiveLibrary non_atomic(const ParamBounds& bounds);
  // Atomic only.
  static PrimitiveLibrary atomic_only();

  int size() const { return static_cast<int>(specs_.size()); }
  int max_param_dim() const { return max_param_dim_; }
  const PrimitiveSpec& spec(int index) const;
  const std::vector<PrimitiveSpec>& specs() const { return specs_; }
  int index_of(PrimitiveId id) const;  // -1 if absent

  // Keeps the first spec(index).param_dim entries of a full-width parameter
  // vector in [-1, 1] and maps them affinely onto the spec's ranges.
  // Throws std::invalid_argument on a width mismatch or bad index.
  Vec truncate_params(const Vec& full, int index) const;

 private:
  std::vector<PrimitiveSpec> specs_;
  int max_param_dim_ = 0;
};

// Sequence of primitive types chosen in one episode, kept for the
// compositionality analysis.
struct TaskSketch {
  std::vector<PrimitiveId> tokens;
  bool success = false;
  double episode_return = 0.0;
};

}  // namespace maple
