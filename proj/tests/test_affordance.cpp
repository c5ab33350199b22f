#include <cmath>
#include <random>

#include "doctest.h"
#include "maple/affordance.hpp"
#include "maple/tasks.hpp"

using namespace maple;

namespace {

// Recomputes the score from its definition without going through the library
// plumbing: scale params by hand, take the best keypoint.
double direct_score(const Vec3& x_reach, const std::vector<Vec3>& points,
                    double tau) {
  if (points.empty()) return 0.0;
  double best = 0.0;
  for (const Vec3& p : points) {
    double slack = std::max((x_reach - p).norm() - tau, 0.0);
    best = std::max(best, 1.0 - std::tanh(slack));
  }
  return best;
}

double scale_param(double x, const ParamRange& r) {
  double c = std::clamp(x, -1.0, 1.0);
  return r.lo + 0.5 * (c + 1.0) * (r.hi - r.lo);
}

Vec random_params(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> d(-1.2, 1.2);  // beyond the unit box
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

TEST_CASE("score equals the direct evaluation on random states") {
  TaskDef task = make_task("cleanup");  // has graspable and pushable objects
  PrimitiveLibrary lib = PrimitiveLibrary::full(task.bounds);
  AffordanceSpec spec;
  spec.keypoints = task.keypoints;
  std::mt19937_64 rng(123);

  int positional_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    WorldState s = task.reset(rng());
    if (trial % 3 == 0) s.held = 0;  // exercise the held-object branches
    int type = static_cast<int>(rng() % static_cast<uint64_t>(lib.size()));
    ParameterizedAction act{type, random_params(rng, lib.max_param_dim())};

    double got = affordance_score(s, lib, act, spec);

    PrimitiveId id = lib.spec(type).id;
    double want;
    if (id == PrimitiveId::Release || id == PrimitiveId::Atomic) {
      want = 1.0;
    } else {
      const auto& bounds = lib.spec(type).bounds;
      Vec3 x_reach(scale_param(act.params[0], bounds[0]),
                   scale_param(act.params[1], bounds[1]),
                   scale_param(act.params[2], bounds[2]));
      want = direct_score(x_reach, task.keypoints(s, id), spec.tau_for(id));
      positional_checked += 1;
    }
    REQUIRE(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
  CHECK(positional_checked > 300);
}

TEST_CASE("score plateaus inside the threshold and decays outside") {
  TaskDef task = make_task("lift");
  PrimitiveLibrary lib = PrimitiveLibrary::full(task.bounds);
  AffordanceSpec spec;
  spec.keypoints = task.keypoints;

  WorldState s = task.reset(4);
  const Vec3 cube = s.objects[0].pos;
  int grasp = lib.index_of(PrimitiveId::Grasp);
  const auto& gb = lib.spec(grasp).bounds;

  auto to_unit = [](double v, const ParamRange& r) {
    return 2.0 * (v - r.lo) / (r.hi - r.lo) - 1.0;
  };
  auto grasp_at = [&](const Vec3& p) {
    Vec full = Vec::Zero(lib.max_param_dim());
    full[0] = to_unit(p.x(), gb[0]);
    full[1] = to_unit(p.y(), gb[1]);
    full[2] = to_unit(p.z(), gb[2]);
    return affordance_score(s, lib, {grasp, full}, spec);
  };

  // Exactly on a keypoint and anywhere within tau: the score saturates at 1.
  CHECK(grasp_at(cube) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(grasp_at(cube + Vec3(spec.tau_grasp * 0.9, 0, 0)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Outside tau the score falls monotonically with distance.
  double prev = 1.0;
  for (double extra = 0.005; extra <= 0.08; extra += 0.005) {
    double val = grasp_at(cube + Vec3(spec.tau_grasp + extra, 0, 0));
    CHECK(val < prev);
    CHECK(val == doctest::Approx(1.0 - std::tanh(extra)).epsilon(1e-9));
    prev = val;
  }
}

TEST_CASE("no keypoints means no affordance") {
  TaskDef task = make_task("lift");
  PrimitiveLibrary lib = PrimitiveLibrary::full(task.bounds);
  AffordanceSpec spec;
  spec.keypoints = task.keypoints;

  WorldState s = task.reset(9);
  Vec at_cube = Vec::Zero(lib.max_param_dim());

  // Reach has no keypoints while the hand is empty (nothing useful to carry).
  CHECK(affordance_score(s, lib, {lib.index_of(PrimitiveId::Reach), at_cube},
                         spec) == 0.0);
  // Lift has no pushable objects, so push is never afforded.
  CHECK(affordance_score(s, lib, {lib.index_of(PrimitiveId::Push), at_cube},
                         spec) == 0.0);
  // Holding the only graspable object leaves grasp with no target.
  s.held = 0;
  CHECK(affordance_score(s, lib, {lib.index_of(PrimitiveId::Grasp), at_cube},
                         spec) == 0.0);
  // A missing keypoint provider behaves like an empty set.
  AffordanceSpec none;
  CHECK(affordance_score(s, lib, {lib.index_of(PrimitiveId::Grasp), at_cube},
                         none) == 0.0);
}

TEST_CASE("release and atomic are always afforded") {
  TaskDef task = make_task("peg");
  PrimitiveLibrary lib = PrimitiveLibrary::full(task.bounds);
  AffordanceSpec spec;  // no keypoints on purpose
  std::mt19937_64 rng(77);
  WorldState s = task.reset(1);
  for (int trial = 0; trial < 100; ++trial) {
    Vec params = random_params(rng, lib.max_param_dim());
    CHECK(affordance_score(s, lib, {lib.index_of(PrimitiveId::Release), params},
                           spec) == 1.0);
    CHECK(affordance_score(s, lib, {lib.index_of(PrimitiveId::Atomic), params},
                           spec) == 1.0);
  }
}

TEST_CASE("per-family thresholds") {
  AffordanceSpec spec;
  spec.tau_reach = 0.11;
  spec.tau_grasp = 0.22;
  spec.tau_push = 0.33;
  CHECK(spec.tau_for(PrimitiveId::Reach) == 0.11);
  CHECK(spec.tau_for(PrimitiveId::Grasp) == 0.22);
  CHECK(spec.tau_for(PrimitiveId::Push) == 0.33);
  CHECK_THROWS_AS(spec.tau_for(PrimitiveId::Release), std::invalid_argument);
  CHECK_THROWS_AS(spec.tau_for(PrimitiveId::Atomic), std::invalid_argument);
}
