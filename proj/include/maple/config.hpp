#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace maple {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key(key) {}
  std::string key;
};

// Flat key=value experiment configuration. Files hold one pair per line,
// '#' starts a comment, unknown keys are rejected. Environment variables
// prefixed MAPLE_ (upper-cased key) override file values; explicit set()
// calls override both.
struct ExperimentConfig {
  std::string task = "lift";
  std::string method = "maple";  // maple | atomic | nonatomic | flat | openloop
  uint64_t seed = 0;

  std::vector<int> hidden = {256, 256};
  double lr = 3e-5;
  double alpha_lr = 3e-5;
  int batch_size = 1024;
  double gamma = 0.99;
  double tau_target = 1e-3;
  bool twin_critics = true;
  double final_layer_scale = 0.01;
  double init_alpha = 1.0;

  long buffer_capacity = 1000000;
  long total_env_steps = 200000;
  long warmup_env_steps = 30000;
  int steps_per_epoch = 3000;
  int grad_steps_per_epoch = 1000;
  int min_replay = 1000;  // decisions stored before updates begin
  long eval_interval = 10000;
  int eval_episodes = 20;
  long checkpoint_interval = 50000;
  int episode_cap = 150;

  double reward_scale = 5.0;
  double affordance_scale = 3.0;
  double aff_tau_reach = 0.06;
  double aff_tau_grasp = 0.03;
  double aff_tau_push = 0.12;

  double tsk_entropy_factor = 0.5;  // target after warm-up: factor * ln k

  int sketch_episodes = 50;
  double stop_success_rate = -1.0;  // end training early at this eval success

  int transfer_max_attempts = 5;
  double transfer_aff_threshold = 0.9;
  int transfer_tail_atomic = 10;

  static ExperimentConfig from_file(const std::string& path);
  // Parses one assignment; throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void apply_env_overrides();
  void validate() const;  // throws ConfigError
  std::string describe() const;
};

}  // namespace maple
