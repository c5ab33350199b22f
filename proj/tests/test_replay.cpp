#include <random>

#include "doctest.h"
#include "maple/replay.hpp"

using namespace maple;

namespace {

Transition make_transition(int tag, Eigen::Index obs_dim = 3,
                           Eigen::Index param_dim = 2) {
  Transition t;
  t.obs = Vec::Constant(obs_dim, tag);
  t.next_obs = Vec::Constant(obs_dim, tag + 0.5);
  t.params = Vec::Constant(param_dim, -tag);
  t.type = tag % 5;
  t.reward = 0.25 * tag;
  t.terminal = tag % 2 == 0;
  t.atomic_steps = tag + 1;
  t.decision_index = tag;
  t.next_decision_index = tag + 1;
  t.next_scheduled_type = tag % 3 == 0 ? tag % 5 : -1;
  return t;
}

}  // namespace

TEST_CASE("ring buffer overwrites the oldest transition at capacity") {
  ReplayBuffer buf(3);
  CHECK(buf.capacity() == 3);
  CHECK(buf.size() == 0);
  for (int i = 0; i < 3; ++i) buf.add(make_transition(i));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).reward == doctest::Approx(0.0));
  CHECK(buf.at(1).reward == doctest::Approx(0.25));
  CHECK(buf.at(2).reward == doctest::Approx(0.5));

  buf.add(make_transition(3));  // replaces slot 0, the oldest
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).reward == doctest::Approx(0.75));
  CHECK(buf.at(1).reward == doctest::Approx(0.25));

  buf.add(make_transition(4));
  buf.add(make_transition(5));
  buf.add(make_transition(6));  // wraps to slot 0 again
  CHECK(buf.at(0).reward == doctest::Approx(1.5));
  CHECK(buf.at(1).reward == doctest::Approx(1.0));
  CHECK(buf.at(2).reward == doctest::Approx(1.25));

  CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
}

TEST_CASE("batch packs transitions column-wise in row order") {
  std::vector<Transition> ts;
  for (int i = 0; i < 4; ++i) ts.push_back(make_transition(i));
  std::vector<const Transition*> rows;
  for (const auto& t : ts) rows.push_back(&t);

  Batch b = Batch::from(rows);
  REQUIRE(b.size() == 4);
  CHECK(b.obs.rows() == 4);
  CHECK(b.obs.cols() == 3);
  CHECK(b.params.cols() == 2);
  for (int i = 0; i < 4; ++i) {
    CHECK(b.obs.row(i).transpose() == ts[static_cast<size_t>(i)].obs);
    CHECK(b.next_obs.row(i).transpose() == ts[static_cast<size_t>(i)].next_obs);
    CHECK(b.params.row(i).transpose() == ts[static_cast<size_t>(i)].params);
    CHECK(b.reward[i] == ts[static_cast<size_t>(i)].reward);
    CHECK(b.type[static_cast<size_t>(i)] == ts[static_cast<size_t>(i)].type);
    CHECK((b.terminal[static_cast<size_t>(i)] != 0) ==
          ts[static_cast<size_t>(i)].terminal);
    CHECK(b.decision_index[static_cast<size_t>(i)] == i);
    CHECK(b.next_decision_index[static_cast<size_t>(i)] == i + 1);
    CHECK(b.next_scheduled_type[static_cast<size_t>(i)] ==
          ts[static_cast<size_t>(i)].next_scheduled_type);
  }

  CHECK_THROWS_AS(Batch::from({}), std::invalid_argument);

  Transition ragged = make_transition(9, 5, 2);
  rows.push_back(&ragged);
  CHECK_THROWS_AS(Batch::from(rows), std::invalid_argument);
}

TEST_CASE("sampling draws only stored transitions") {
  ReplayBuffer buf(16);
  std::mt19937_64 rng(5);
  CHECK_THROWS_AS(buf.sample(4, rng), std::invalid_argument);

  for (int i = 0; i < 10; ++i) buf.add(make_transition(i));
  Batch b = buf.sample(64, rng);
  REQUIRE(b.size() == 64);
  std::vector<int> seen(10, 0);
  for (int i = 0; i < 64; ++i) {
    int tag = static_cast<int>(b.obs(i, 0));
    REQUIRE(tag >= 0);
    REQUIRE(tag < 10);
    CHECK(b.reward[i] == doctest::Approx(0.25 * tag));
    seen[static_cast<size_t>(tag)] += 1;
  }
  // With 64 uniform draws over 10 items, several distinct items must appear.
  int distinct = 0;
  for (int c : seen) distinct += c > 0 ? 1 : 0;
  CHECK(distinct >= 5);
}
