#include <cmath>
#include <random>

#include "doctest.h"
#include "maple/agent.hpp"
#include "maple/tasks.hpp"

using namespace maple;

namespace {

AgentConfig small_config(int obs_dim) {
  AgentConfig c;
  c.obs_dim = obs_dim;
  c.hidden = {16, 16};
  c.lr = 1e-3;
  c.alpha_lr = 1e-3;
  c.gamma = 0.97;
  c.tau_target = 0.02;
  c.episode_cap = 40;
  return c;
}

PrimitiveLibrary small_library() {
  return PrimitiveLibrary::full(ParamBounds::defaults());
}

Vec random_obs(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n(rng);
  return v;
}

Transition random_transition(std::mt19937_64& rng, int obs_dim, int k,
                             int d_a) {
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  Transition t;
  t.obs = random_obs(rng, obs_dim);
  t.next_obs = random_obs(rng, obs_dim);
  t.type = static_cast<int>(rng() % static_cast<uint64_t>(k));
  t.params = Vec(d_a);
  for (int j = 0; j < d_a; ++j) t.params[j] = u(rng);
  t.reward = u(rng);
  t.terminal = false;
  t.decision_index = static_cast<int>(rng() % 40);
  t.next_decision_index = t.decision_index + 1;
  return t;
}

Batch make_batch(std::mt19937_64& rng, int n, int obs_dim, int k, int d_a) {
  std::vector<Transition> ts;
  for (int i = 0; i < n; ++i)
    ts.push_back(random_transition(rng, obs_dim, k, d_a));
  std::vector<const Transition*> rows;
  for (const auto& t : ts) rows.push_back(&t);
  return Batch::from(rows);
}

template <typename A, typename B>
bool identical(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

TEST_CASE("actions stay inside the decision space") {
  PrimitiveLibrary lib = small_library();
  HsacAgent agent(small_config(6), lib, 11);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    Vec obs = random_obs(rng, 6);
    ParameterizedAction a = agent.act(obs, i % 40, i % 2 == 0, rng);
    CHECK(a.type >= 0);
    CHECK(a.type < lib.size());
    REQUIRE(a.params.size() == lib.max_param_dim());
    for (int j = 0; j < a.params.size(); ++j) {
      CHECK(a.params[j] >= -1.0);
      CHECK(a.params[j] <= 1.0);
    }
  }
}

TEST_CASE("greedy actions ignore the random stream") {
  PrimitiveLibrary lib = small_library();
  HsacAgent agent(small_config(6), lib, 11);
  std::mt19937_64 r1(1), r2(999);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    Vec obs = random_obs(rng, 6);
    ParameterizedAction a = agent.act(obs, 3, true, r1);
    ParameterizedAction b = agent.act(obs, 3, true, r2);
    CHECK(a.type == b.type);
    CHECK(identical(a.params, b.params));
  }
  // Stochastic actions with identical streams also agree.
  std::mt19937_64 s1(7), s2(7);
  Vec obs = random_obs(rng, 6);
  ParameterizedAction a = agent.act(obs, 0, false, s1);
  ParameterizedAction b = agent.act(obs, 0, false, s2);
  CHECK(a.type == b.type);
  CHECK(identical(a.params, b.params));
}

TEST_CASE("target critics start as copies and track polyak averages") {
  PrimitiveLibrary lib = small_library();
  AgentConfig cfg = small_config(5);
  HsacAgent agent(cfg, lib, 3);

  CHECK(identical(agent.critic().q1().params_flat(),
                  agent.critic().target1().params_flat()));
  CHECK(identical(agent.critic().q2().params_flat(),
                  agent.critic().target2().params_flat()));

  Vec t1_before = agent.critic().target1().params_flat();
  Vec t2_before = agent.critic().target2().params_flat();

  std::mt19937_64 rng(8);
  Batch b = make_batch(rng, 32, 5, lib.size(), lib.max_param_dim());
  agent.update(b, rng);

  Vec q1_after = agent.critic().q1().params_flat();
  Vec q2_after = agent.critic().q2().params_flat();
  CHECK(!identical(q1_after, t1_before));  // the critic actually moved

  const double tau = cfg.tau_target;
  Vec want1 = (1.0 - tau) * t1_before + tau * q1_after;
  Vec want2 = (1.0 - tau) * t2_before + tau * q2_after;
  CHECK((agent.critic().target1().params_flat() - want1).cwiseAbs().maxCoeff() <
        1e-14);
  CHECK((agent.critic().target2().params_flat() - want2).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("checkpoints restore behaviour exactly") {
  PrimitiveLibrary lib = small_library();
  AgentConfig cfg = small_config(6);

  HsacAgent a(cfg, lib, 21);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5; ++i)
    a.update(make_batch(rng, 24, 6, lib.size(), lib.max_param_dim()), rng);
  a.set_entropy_targets(0.5 * std::log(5.0), -7.0);

  Checkpoint ck;
  a.save(ck);
  CHECK(ck.meta("kind") == "hsac");

  HsacAgent b(cfg, lib, 99);  // different init, then overwritten by the load
  b.load(ck);

  CHECK(b.alpha_tsk() == a.alpha_tsk());
  CHECK(b.alpha_p() == a.alpha_p());
  CHECK(b.target_entropy_tsk() == a.target_entropy_tsk());
  CHECK(b.target_entropy_p() == a.target_entropy_p());
  for (int i = 0; i < 20; ++i) {
    Vec obs = random_obs(rng, 6);
    ParameterizedAction pa = a.act(obs, i, true, rng);
    ParameterizedAction pb = b.act(obs, i, true, rng);
    CHECK(pa.type == pb.type);
    CHECK(identical(pa.params, pb.params));
  }
  CHECK(identical(b.critic().q1().params_flat(), a.critic().q1().params_flat()));
  CHECK(identical(b.critic().target2().params_flat(),
                  a.critic().target2().params_flat()));
}

TEST_CASE("updates learn a type preference from rewards") {
  // Contextual bandit: only the first primitive pays. With terminal
  // transitions the critic regresses on the raw reward, so the task policy
  // must concentrate on the paying type.
  PrimitiveLibrary lib = small_library();
  AgentConfig cfg = small_config(4);
  cfg.hidden = {32, 32};
  cfg.lr = 3e-3;
  cfg.alpha_lr = 3e-3;
  cfg.init_alpha = 0.05;
  HsacAgent agent(cfg, lib, 2);
  agent.set_entropy_targets(0.5 * std::log(static_cast<double>(lib.size())),
                            -static_cast<double>(lib.max_param_dim()));

  std::mt19937_64 rng(14);
  ReplayBuffer buf(512);
  for (int i = 0; i < 512; ++i) {
    Transition t = random_transition(rng, 4, lib.size(), lib.max_param_dim());
    t.reward = t.type == 0 ? 1.0 : 0.0;
    t.terminal = true;
    buf.add(std::move(t));
  }

  double first_loss = 0.0, last_loss = 0.0;
  for (int step = 0; step < 500; ++step) {
    UpdateStats st = agent.update(buf.sample(64, rng), rng);
    if (step == 0) first_loss = st.critic_loss;
    if (step == 499) last_loss = st.critic_loss;
    REQUIRE(std::isfinite(st.critic_loss));
    REQUIRE(std::isfinite(st.task_loss));
    REQUIRE(std::isfinite(st.param_loss));
    REQUIRE(st.alpha_tsk > 0.0);
    REQUIRE(st.alpha_p > 0.0);
    REQUIRE(st.task_entropy >= -1e-12);
    REQUIRE(st.task_entropy <=
            std::log(static_cast<double>(lib.size())) + 1e-9);
  }
  CHECK(last_loss < first_loss);

  int picked_zero = 0;
  for (int i = 0; i < 50; ++i) {
    Vec obs = random_obs(rng, 4);
    if (agent.act(obs, 0, true, rng).type == 0) picked_zero += 1;
  }
  CHECK(picked_zero >= 35);
}

TEST_CASE("a frozen task policy never moves during sketch-guided updates") {
  PrimitiveLibrary lib = small_library();
  AgentConfig cfg = small_config(5);
  cfg.freeze_task_policy = true;
  HsacAgent agent(cfg, lib, 6);

  Vec task_before = agent.task_net().params_flat();
  double alpha_tsk_before = agent.alpha_tsk();
  Vec param0_before = agent.param_net(0).params_flat();

  std::mt19937_64 rng(12);
  for (int step = 0; step < 3; ++step) {
    Batch b = make_batch(rng, 16, 5, lib.size(), lib.max_param_dim());
    for (auto& s : b.next_scheduled_type)
      s = static_cast<int>(rng() % static_cast<uint64_t>(lib.size()));
    agent.update(b, rng);
  }

  CHECK(identical(agent.task_net().params_flat(), task_before));
  CHECK(agent.alpha_tsk() == alpha_tsk_before);
  CHECK(!identical(agent.param_net(0).params_flat(), param0_before));
}

TEST_CASE("scheduled successor types drop the task entropy correction") {
  PrimitiveLibrary lib = small_library();
  AgentConfig cfg = small_config(5);
  cfg.twin_critics = false;
  HsacAgent agent(cfg, lib, 30);

  std::mt19937_64 rng(31);
  Batch sampled = make_batch(rng, 8, 5, lib.size(), lib.max_param_dim());
  // Zero uniform draws make the sampled successor type the first primitive,
  // the same one the schedule pins, so the only difference between the two
  // losses is the log-probability correction.
  CriticNoise noise = agent.draw_critic_noise(8, rng);
  noise.type_u.setZero();
  Batch scheduled = sampled;
  for (auto& s : scheduled.next_scheduled_type) s = 0;

  agent.set_log_alphas(-40.0, agent.log_alpha_p_value());  // alpha_tsk ~ 0
  double near_zero_gap = std::abs(agent.critic_loss(sampled, noise) -
                                  agent.critic_loss(scheduled, noise));
  CHECK(near_zero_gap < 1e-10);

  agent.set_log_alphas(0.0, agent.log_alpha_p_value());  // alpha_tsk = 1
  double full_gap = std::abs(agent.critic_loss(sampled, noise) -
                             agent.critic_loss(scheduled, noise));
  CHECK(full_gap > 1e-6);
}

TEST_CASE("temperature objectives follow alpha times the entropy gap") {
  PrimitiveLibrary lib = small_library();
  HsacAgent agent(small_config(5), lib, 44);
  agent.set_entropy_targets(0.2, -1.0);
  agent.set_log_alphas(std::log(2.0), std::log(3.0));
  CHECK(agent.alpha_tsk_loss(0.7) == doctest::Approx(2.0 * 0.5).epsilon(1e-12));
  CHECK(agent.alpha_p_loss(-2.0) == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(agent.alpha_tsk_loss(0.2) == doctest::Approx(0.0));
}

TEST_CASE("the open-loop encoding sees only the decision index") {
  PrimitiveLibrary lib = small_library();
  AgentConfig cfg = small_config(6);
  cfg.task_input = TaskInput::DecisionIndex;
  cfg.episode_cap = 40;
  HsacAgent agent(cfg, lib, 17);

  std::mt19937_64 rng(3);
  Mat obs_a(2, 6), obs_b(2, 6);
  obs_a.setRandom();
  obs_b.setRandom();
  std::vector<int> idx = {0, 7};

  Mat ea = agent.encode_task_input(obs_a, idx);
  Mat eb = agent.encode_task_input(obs_b, idx);
  CHECK(identical(ea, eb));  // the observation is irrelevant
  REQUIRE(ea.cols() == agent.task_input_dim());
  CHECK(ea.cols() > 1);

  // Leading coordinate is the scaled position, the rest a one-hot bucket.
  CHECK(ea(0, 0) == doctest::Approx(0.0));
  CHECK(ea(1, 0) == doctest::Approx(7.0 / 40.0));
  CHECK(ea.row(0).tail(ea.cols() - 1).sum() == doctest::Approx(1.0));
  CHECK(ea.row(1).tail(ea.cols() - 1).sum() == doctest::Approx(1.0));
  CHECK(!identical(ea.row(0), ea.row(1)));

  // Greedy decisions depend on the index alone.
  Vec o1 = random_obs(rng, 6), o2 = random_obs(rng, 6);
  ParameterizedAction t1 = agent.act(o1, 5, true, rng);
  ParameterizedAction t2 = agent.act(o2, 5, true, rng);
  CHECK(t1.type == t2.type);
}

TEST_CASE("the flat baseline emits valid decisions and restores exactly") {
  PrimitiveLibrary lib = small_library();
  AgentConfig cfg = small_config(6);
  FlatAgent agent(cfg, lib, 23);

  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    Vec obs = random_obs(rng, 6);
    ParameterizedAction a = agent.act(obs, 0, i % 2 == 0, rng);
    CHECK(a.type >= 0);
    CHECK(a.type < lib.size());
    REQUIRE(a.params.size() == lib.max_param_dim());
    for (int j = 0; j < a.params.size(); ++j) {
      CHECK(a.params[j] >= -1.0);
      CHECK(a.params[j] <= 1.0);
    }
  }

  for (int i = 0; i < 5; ++i)
    agent.update(make_batch(rng, 24, 6, lib.size(), lib.max_param_dim()), rng);

  Checkpoint ck;
  agent.save(ck);
  FlatAgent other(cfg, lib, 77);
  other.load(ck);
  CHECK(other.alpha_tsk() == agent.alpha_tsk());
  for (int i = 0; i < 20; ++i) {
    Vec obs = random_obs(rng, 6);
    ParameterizedAction pa = agent.act(obs, 0, true, rng);
    ParameterizedAction pb = other.act(obs, 0, true, rng);
    CHECK(pa.type == pb.type);
    CHECK(identical(pa.params, pb.params));
  }
}
