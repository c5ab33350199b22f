#include "maple/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "maple/rng.hpp"
#include "maple/sketch.hpp"

namespace maple {

EpisodeResult run_episode(const TaskDef& task, uint64_t env_seed,
                          const DecisionPolicy& policy,
                          const PrimitiveLibrary& lib,
                          const AffordanceSpec* aff, double reward_scale,
                          int episode_cap) {
  EpisodeResult ep;
  WorldState state = task.reset(env_seed);
  Vec obs = task.observe(state);
  int decision = 0;
  while (state.atomic_timer < episode_cap) {
    ParameterizedAction act = policy(obs, decision);
    double bonus = 0.0;
    if (aff) bonus = aff->scale * affordance_score(state, lib, act, *aff);
    int timer_before = state.atomic_timer;
    PrimitiveOutcome out = execute_primitive(state, lib, act, task);
    Vec next_obs = task.observe(state);

    ep.task_return += out.reward_sum;
    for (size_t j = 0; j < out.step_rewards.size(); ++j)
      if (timer_before + static_cast<int>(j) < episode_cap)
        ep.task_return_capped += out.step_rewards[j];
    ep.atomic_steps += out.atomic_steps;
    ep.success = ep.success || out.success_seen;
    ep.sketch.push_back(lib.spec(act.type).id);

    Transition t;
    t.obs = obs;
    t.type = act.type;
    t.params = act.params;
    t.reward = reward_scale * (out.reward_sum + bonus);
    t.next_obs = next_obs;
    t.terminal = false;
    t.atomic_steps = out.atomic_steps;
    t.decision_index = decision;
    t.next_decision_index = decision + 1;
    ep.transitions.push_back(std::move(t));

    obs = next_obs;
    decision += 1;
  }
  return ep;
}

EpisodeResult run_transfer_episode(const TaskDef& task, uint64_t env_seed,
                                   HsacAgent& agent,
                                   const TransferSchedule& sched,
                                   const PrimitiveLibrary& lib,
                                   const AffordanceSpec& aff, bool shaped,
                                   double reward_scale, int episode_cap,
                                   bool greedy, std::mt19937_64& rng) {
  EpisodeResult ep;
  WorldState state = task.reset(env_seed);
  Vec obs = task.observe(state);
  int decision = 0;
  int atomic_idx = lib.index_of(PrimitiveId::Atomic);
  if (atomic_idx < 0)
    throw std::invalid_argument("transfer schedule needs the atomic primitive");

  bool done = false;
  auto run_decision = [&](int type_index) -> double {
    ParameterizedAction act;
    act.type = type_index;
    act.params = agent.sample_params(obs, type_index, greedy, rng);
    double s_aff = affordance_score(state, lib, act, aff);
    int timer_before = state.atomic_timer;
    PrimitiveOutcome out = execute_primitive(state, lib, act, task);
    Vec next_obs = task.observe(state);
    ep.task_return += out.reward_sum;
    for (size_t j = 0; j < out.step_rewards.size(); ++j)
      if (timer_before + static_cast<int>(j) < episode_cap)
        ep.task_return_capped += out.step_rewards[j];
    ep.atomic_steps += out.atomic_steps;
    ep.success = ep.success || out.success_seen;
    ep.sketch.push_back(lib.spec(type_index).id);

    Transition t;
    t.obs = obs;
    t.type = type_index;
    t.params = act.params;
    t.reward =
        reward_scale * (out.reward_sum + (shaped ? aff.scale * s_aff : 0.0));
    t.next_obs = next_obs;
    t.terminal = false;
    t.atomic_steps = out.atomic_steps;
    t.decision_index = decision;
    t.next_decision_index = decision + 1;
    ep.transitions.push_back(std::move(t));

    obs = next_obs;
    decision += 1;
    done = state.atomic_timer >= episode_cap;
    return s_aff;
  };

  for (PrimitiveId token : sched.tokens) {
    int idx = lib.index_of(token);
    if (idx < 0)
      throw std::invalid_argument("schedule token missing from library");
    for (int attempt = 0; attempt < sched.max_attempts && !done; ++attempt) {
      double s_aff = run_decision(idx);
      if (s_aff >= sched.aff_threshold) break;
    }
    if (done) break;
  }
  for (int i = 0; i < sched.tail_atomic && !done; ++i) run_decision(atomic_idx);

  // The schedule is the task policy: each transition's successor type is
  // whatever the schedule actually chose next.
  for (size_t i = 0; i < ep.transitions.size(); ++i) {
    ep.transitions[i].next_scheduled_type =
        i + 1 < ep.transitions.size() ? ep.transitions[i + 1].type
                                      : atomic_idx;
  }
  return ep;
}

EvalResult evaluate_policy(const TaskDef& task, const DecisionPolicy& policy,
                           const PrimitiveLibrary& lib, int episodes,
                           uint64_t seed_base, int episode_cap) {
  EvalResult ev;
  ev.usage.assign(static_cast<size_t>(lib.size()), 0.0);
  long decisions = 0;
  for (int e = 0; e < episodes; ++e) {
    EpisodeResult ep =
        run_episode(task, derive_seed(seed_base, "episode", e), policy, lib,
                    nullptr, 1.0, episode_cap);
    ev.return_norm += 100.0 * ep.task_return_capped / (task.r_max * episode_cap);
    ev.success_rate += ep.success ? 1.0 : 0.0;
    for (const Transition& t : ep.transitions)
      ev.usage[static_cast<size_t>(t.type)] += 1.0;
    decisions += static_cast<long>(ep.transitions.size());
    TaskSketch sk;
    sk.tokens = ep.sketch;
    sk.success = ep.success;
    sk.episode_return = ep.task_return;
    ev.sketches.push_back(std::move(sk));
  }
  ev.return_norm /= episodes;
  ev.success_rate /= episodes;
  if (decisions > 0)
    for (double& u : ev.usage) u /= static_cast<double>(decisions);
  return ev;
}

TransferSchedule make_schedule(const std::vector<TaskSketch>& source,
                               const ExperimentConfig& cfg) {
  std::vector<TaskSketch> successes;
  for (const TaskSketch& s : source)
    if (s.success) successes.push_back(s);
  if (successes.empty())
    throw std::invalid_argument("no successful sketches to transfer from");
  TransferSchedule sched;
  if (successes.size() == 1) {
    sched.tokens = successes[0].tokens;
  } else {
    int idx = medoid_index(tokenize_all(successes));
    sched.tokens = successes[static_cast<size_t>(idx)].tokens;
  }
  sched.max_attempts = cfg.transfer_max_attempts;
  sched.aff_threshold = cfg.transfer_aff_threshold;
  sched.tail_atomic = cfg.transfer_tail_atomic;
  return sched;
}

PrimitiveLibrary make_library(const std::string& method, const TaskDef& task) {
  if (method == "atomic") return PrimitiveLibrary::atomic_only();
  if (method == "nonatomic") return PrimitiveLibrary::non_atomic(task.bounds);
  if (method == "maple" || method == "flat" || method == "openloop")
    return PrimitiveLibrary::full(task.bounds);
  throw std::invalid_argument("unknown method: " + method);
}

std::unique_ptr<Agent> make_agent(const ExperimentConfig& cfg,
                                  const TaskDef& task,
                                  const PrimitiveLibrary& lib) {
  AgentConfig ac;
  ac.obs_dim = task.obs_dim;
  ac.hidden = cfg.hidden;
  ac.lr = cfg.lr;
  ac.alpha_lr = cfg.alpha_lr;
  ac.gamma = cfg.gamma;
  ac.tau_target = cfg.tau_target;
  ac.twin_critics = cfg.twin_critics;
  ac.final_layer_scale = cfg.final_layer_scale;
  ac.init_alpha = cfg.init_alpha;
  ac.episode_cap = cfg.episode_cap;
  ac.task_input = cfg.method == "openloop" ? TaskInput::DecisionIndex
                                           : TaskInput::Observation;
  uint64_t seed = derive_seed(cfg.seed, "agent-init");
  if (cfg.method == "flat") return std::make_unique<FlatAgent>(ac, lib, seed);
  return std::make_unique<HsacAgent>(ac, lib, seed);
}

Trainer::Trainer(const ExperimentConfig& cfg)
    : cfg_(cfg),
      task_(make_task(cfg.task)),
      lib_(make_library(cfg.method, task_)),
      buffer_(static_cast<size_t>(cfg.buffer_capacity)),
      rng_explore_(make_rng(cfg.seed, "explore")),
      rng_update_(make_rng(cfg.seed, "update")) {
  task_.episode_cap = cfg_.episode_cap;
  aff_.tau_reach = cfg_.aff_tau_reach;
  aff_.tau_grasp = cfg_.aff_tau_grasp;
  aff_.tau_push = cfg_.aff_tau_push;
  aff_.scale = cfg_.affordance_scale;
  aff_.keypoints = task_.keypoints;
  agent_ = make_agent(cfg_, task_, lib_);
  hsac_ = dynamic_cast<HsacAgent*>(agent_.get());
}

Trainer::Trainer(const ExperimentConfig& cfg, TransferSchedule schedule)
    : Trainer(cfg) {
  if (!hsac_)
    throw std::invalid_argument(
        "sketch-guided training needs the hierarchical agent");
  schedule_ = std::move(schedule);
  // The schedule replaces the task policy.
  AgentConfig ac = hsac_->config();
  ac.freeze_task_policy = true;
  agent_ = std::make_unique<HsacAgent>(ac, lib_,
                                       derive_seed(cfg.seed, "agent-init"));
  hsac_ = dynamic_cast<HsacAgent*>(agent_.get());
}

DecisionPolicy Trainer::explore_policy() {
  return [this](const Vec& obs, int decision_index) {
    return agent_->act(obs, decision_index, false, rng_explore_);
  };
}

DecisionPolicy Trainer::greedy_policy() {
  return [this](const Vec& obs, int decision_index) {
    return agent_->act(obs, decision_index, true, rng_explore_);
  };
}

EpisodeResult Trainer::roll(uint64_t env_seed, bool greedy) {
  if (schedule_) {
    return run_transfer_episode(task_, env_seed, *hsac_, *schedule_, lib_,
                                aff_, /*shaped=*/!greedy, cfg_.reward_scale,
                                cfg_.episode_cap, greedy, rng_explore_);
  }
  if (greedy)
    return run_episode(task_, env_seed, greedy_policy(), lib_, nullptr, 1.0,
                       cfg_.episode_cap);
  return run_episode(task_, env_seed, explore_policy(), lib_, &aff_,
                     cfg_.reward_scale, cfg_.episode_cap);
}

EpisodeResult Trainer::explore_episode() {
  EpisodeResult ep =
      roll(derive_seed(cfg_.seed, "env", static_cast<uint64_t>(episode_counter_++)),
           false);
  return ep;
}

void Trainer::maybe_switch_targets() {
  if (warmed_up_ || env_steps_ < cfg_.warmup_env_steps) return;
  int k = lib_.size();
  double tsk_target = cfg_.tsk_entropy_factor * std::log(static_cast<double>(k));
  double p_target = -static_cast<double>(lib_.max_param_dim());
  agent_->set_entropy_targets(tsk_target, p_target);
  warmed_up_ = true;
}

EvalResult Trainer::evaluate_now() {
  uint64_t base = derive_seed(cfg_.seed, "eval");
  if (schedule_) {
    EvalResult ev;
    ev.usage.assign(static_cast<size_t>(lib_.size()), 0.0);
    long decisions = 0;
    for (int e = 0; e < cfg_.eval_episodes; ++e) {
      EpisodeResult ep = run_transfer_episode(
          task_, derive_seed(base, "episode", e), *hsac_, *schedule_, lib_,
          aff_, false, 1.0, cfg_.episode_cap, true, rng_explore_);
      ev.return_norm +=
          100.0 * ep.task_return_capped / (task_.r_max * cfg_.episode_cap);
      ev.success_rate += ep.success ? 1.0 : 0.0;
      for (const Transition& t : ep.transitions)
        ev.usage[static_cast<size_t>(t.type)] += 1.0;
      decisions += static_cast<long>(ep.transitions.size());
      TaskSketch sk;
      sk.tokens = ep.sketch;
      sk.success = ep.success;
      sk.episode_return = ep.task_return;
      ev.sketches.push_back(std::move(sk));
    }
    ev.return_norm /= cfg_.eval_episodes;
    ev.success_rate /= cfg_.eval_episodes;
    if (decisions > 0)
      for (double& u : ev.usage) u /= static_cast<double>(decisions);
    return ev;
  }
  return evaluate_policy(task_, greedy_policy(), lib_, cfg_.eval_episodes,
                         base, cfg_.episode_cap);
}

std::vector<TaskSketch> Trainer::collect_sketches(int episodes) {
  std::vector<TaskSketch> out;
  uint64_t base = derive_seed(cfg_.seed, "sketch");
  for (int e = 0; e < episodes; ++e) {
    EpisodeResult ep = roll(derive_seed(base, "episode", e), true);
    TaskSketch sk;
    sk.tokens = ep.sketch;
    sk.success = ep.success;
    sk.episode_return = ep.task_return;
    out.push_back(std::move(sk));
  }
  return out;
}

std::vector<MetricRecord> Trainer::run(MetricsCsv* csv, TrajectoryLog* traj,
                                       const std::string& ckpt_dir) {
  std::vector<MetricRecord> records;
  long next_eval = cfg_.eval_interval;
  long next_ckpt = cfg_.checkpoint_interval;

  auto save_ckpt = [&](const std::string& tag) {
    if (ckpt_dir.empty()) return;
    Checkpoint ck;
    agent_->save(ck);
    ck.put_meta("task", cfg_.task);
    ck.put_meta("method", cfg_.method);
    ck.put_scalar("env_steps", static_cast<double>(env_steps_));
    ck.save(ckpt_dir + "/ckpt_" + tag + ".bin");
  };

  auto do_eval = [&]() {
    EvalResult ev = evaluate_now();
    MetricRecord r;
    r.env_steps = env_steps_;
    r.return_norm = ev.return_norm;
    r.success_rate = ev.success_rate;
    r.alpha_tsk = agent_->alpha_tsk();
    r.alpha_p = agent_->alpha_p();
    r.usage = ev.usage;
    records.push_back(r);
    if (csv) csv->append(r);
    return r;
  };

  maybe_switch_targets();
  while (env_steps_ < cfg_.total_env_steps) {
    long epoch_end = env_steps_ + cfg_.steps_per_epoch;
    while (env_steps_ < epoch_end && env_steps_ < cfg_.total_env_steps) {
      uint64_t env_seed =
          derive_seed(cfg_.seed, "env", static_cast<uint64_t>(episode_counter_));
      EpisodeResult ep = roll(env_seed, false);
      episode_counter_ += 1;
      for (Transition& t : ep.transitions) buffer_.add(std::move(t));
      env_steps_ += ep.atomic_steps;
      maybe_switch_targets();
      if (traj) {
        EpisodeLogEntry e;
        e.episode = episode_counter_ - 1;
        e.env_steps = env_steps_;
        e.env_seed = env_seed;
        e.sketch = ep.sketch;
        e.task_return = ep.task_return;
        e.atomic_steps = ep.atomic_steps;
        e.success = ep.success;
        traj->append(e);
      }
    }

    if (buffer_.size() >= static_cast<size_t>(cfg_.min_replay)) {
      for (int g = 0; g < cfg_.grad_steps_per_epoch; ++g) {
        Batch b = buffer_.sample(cfg_.batch_size, rng_update_);
        agent_->update(b, rng_update_);
      }
    }

    if (env_steps_ >= next_eval) {
      MetricRecord r = do_eval();
      next_eval = (env_steps_ / cfg_.eval_interval + 1) * cfg_.eval_interval;
      if (cfg_.stop_success_rate >= 0.0 &&
          r.success_rate >= cfg_.stop_success_rate) {
        save_ckpt("final");
        return records;
      }
    }
    if (env_steps_ >= next_ckpt) {
      save_ckpt(std::to_string(env_steps_));
      next_ckpt =
          (env_steps_ / cfg_.checkpoint_interval + 1) * cfg_.checkpoint_interval;
    }
  }

  if (records.empty() || records.back().env_steps < env_steps_) do_eval();
  save_ckpt("final");
  return records;
}

}  // namespace maple
