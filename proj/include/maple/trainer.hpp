#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "maple/affordance.hpp"
#include "maple/agent.hpp"
#include "maple/config.hpp"
#include "maple/logio.hpp"
#include "maple/replay.hpp"
#include "maple/sim.hpp"
#include "maple/tasks.hpp"

namespace maple {

// Maps an observation and the decision index to the next decision.
using DecisionPolicy =
    std::function<ParameterizedAction(const Vec& obs, int decision_index)>;

struct EpisodeResult {
  std::vector<Transition> transitions;
  std::vector<PrimitiveId> sketch;
  double task_return = 0.0;  // summed dense rewards, unshaped and unscaled
  double task_return_capped = 0.0;  // same, counting only steps before the cap
  int atomic_steps = 0;
  bool success = false;  // predicate held after any atomic step
};

// Rolls one episode to the step cap; success is recorded, never terminal,
// so the learner keeps collecting reward for staying in the solved state and
// bootstraps through the truncation. The cap bounds when new decisions may
// start; a primitive already running may overshoot it. aff == nullptr
// disables the shaping bonus (evaluation); otherwise each decision reward is
// reward_scale * (sum of dense rewards + aff->scale * affordance score).
EpisodeResult run_episode(const TaskDef& task, uint64_t env_seed,
                          const DecisionPolicy& policy,
                          const PrimitiveLibrary& lib,
                          const AffordanceSpec* aff, double reward_scale,
                          int episode_cap);

struct EvalResult {
  double return_norm = 0.0;   // 0..100
  double success_rate = 0.0;  // 0..1
  std::vector<double> usage;  // selection frequency per primitive index
  std::vector<TaskSketch> sketches;
};

PrimitiveLibrary make_library(const std::string& method, const TaskDef& task);
std::unique_ptr<Agent> make_agent(const ExperimentConfig& cfg,
                                  const TaskDef& task,
                                  const PrimitiveLibrary& lib);

// A fixed sequence of primitive types that stands in for the task policy.
// Each entry is retried (fresh parameters each attempt) until its affordance
// score clears the threshold or the attempt budget runs out, then a tail of
// atomic decisions follows.
struct TransferSchedule {
  std::vector<PrimitiveId> tokens;
  int max_attempts = 5;
  double aff_threshold = 0.9;
  int tail_atomic = 10;
};

// One episode driven by a schedule instead of the task policy. Parameters
// still come from the agent's per-primitive heads. When shaped is false the
// stored rewards carry no affordance bonus (the score still gates schedule
// advancement).
EpisodeResult run_transfer_episode(const TaskDef& task, uint64_t env_seed,
                                   HsacAgent& agent,
                                   const TransferSchedule& sched,
                                   const PrimitiveLibrary& lib,
                                   const AffordanceSpec& aff, bool shaped,
                                   double reward_scale, int episode_cap,
                                   bool greedy, std::mt19937_64& rng);

// Medoid of the successful source sketches, wrapped with the configured
// retry/tail settings. Throws if no successful sketch exists.
TransferSchedule make_schedule(const std::vector<TaskSketch>& source,
                               const ExperimentConfig& cfg);

// Owns one training run: environment interaction, replay, updates,
// periodic evaluation and checkpoints.
class Trainer {
 public:
  Trainer(const ExperimentConfig& cfg);
  Trainer(const ExperimentConfig& cfg, TransferSchedule schedule);

  // Runs to total_env_steps (or the early-stop threshold). Every evaluation
  // record is returned; csv/traj/ckpt_dir may be null/empty to skip logging.
  std::vector<MetricRecord> run(MetricsCsv* csv, TrajectoryLog* traj,
                                const std::string& ckpt_dir);

  EvalResult evaluate_now();
  std::vector<TaskSketch> collect_sketches(int episodes);

  Agent& agent() { return *agent_; }
  const TaskDef& task() const { return task_; }
  const PrimitiveLibrary& library() const { return lib_; }
  long env_steps() const { return env_steps_; }
  const ExperimentConfig& config() const { return cfg_; }

  // One exploration episode through the current policy (used by tests).
  EpisodeResult explore_episode();

 private:
  DecisionPolicy explore_policy();
  DecisionPolicy greedy_policy();
  EpisodeResult roll(uint64_t env_seed, bool greedy);
  void maybe_switch_targets();

  ExperimentConfig cfg_;
  TaskDef task_;
  PrimitiveLibrary lib_;
  AffordanceSpec aff_;
  std::unique_ptr<Agent> agent_;
  HsacAgent* hsac_ = nullptr;  // set when the agent is hierarchical
  std::optional<TransferSchedule> schedule_;
  ReplayBuffer buffer_;
  std::mt19937_64 rng_explore_, rng_update_;
  long env_steps_ = 0;
  long episode_counter_ = 0;
  bool warmed_up_ = false;
};

// Greedy evaluation of an arbitrary decision policy.
EvalResult evaluate_policy(const TaskDef& task, const DecisionPolicy& policy,
                           const PrimitiveLibrary& lib, int episodes,
                           uint64_t seed_base, int episode_cap);

}  // namespace maple
