#include "maple/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace maple {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  return static_cast<int>(parse_long(key, v));
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_int(key, item));
  }
  if (out.empty()) throw ConfigError(key, "expected a comma list of integers");
  return out;
}

std::string upper_snake(const std::string& key) {
  std::string out;
  for (char c : key) out.push_back(static_cast<char>(std::toupper(c)));
  return out;
}

const std::vector<std::string>& all_keys() {
  static const std::vector<std::string> keys = {
      "task", "method", "seed", "hidden", "lr", "alpha_lr", "batch_size",
      "gamma", "tau_target", "twin_critics", "final_layer_scale", "init_alpha",
      "buffer_capacity", "total_env_steps", "warmup_env_steps",
      "steps_per_epoch", "grad_steps_per_epoch", "min_replay",
      "eval_interval", "eval_episodes", "checkpoint_interval", "episode_cap",
      "reward_scale", "affordance_scale", "aff_tau_reach", "aff_tau_grasp",
      "aff_tau_push", "tsk_entropy_factor", "sketch_episodes",
      "stop_success_rate", "transfer_max_attempts", "transfer_aff_threshold",
      "transfer_tail_atomic"};
  return keys;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  std::string v = trim(raw);
  if (key == "task") task = v;
  else if (key == "method") method = v;
  else if (key == "seed") seed = static_cast<uint64_t>(parse_long(key, v));
  else if (key == "hidden") hidden = parse_int_list(key, v);
  else if (key == "lr") lr = parse_double(key, v);
  else if (key == "alpha_lr") alpha_lr = parse_double(key, v);
  else if (key == "batch_size") batch_size = parse_int(key, v);
  else if (key == "gamma") gamma = parse_double(key, v);
  else if (key == "tau_target") tau_target = parse_double(key, v);
  else if (key == "twin_critics") twin_critics = parse_bool(key, v);
  else if (key == "final_layer_scale") final_layer_scale = parse_double(key, v);
  else if (key == "init_alpha") init_alpha = parse_double(key, v);
  else if (key == "buffer_capacity") buffer_capacity = parse_long(key, v);
  else if (key == "total_env_steps") total_env_steps = parse_long(key, v);
  else if (key == "warmup_env_steps") warmup_env_steps = parse_long(key, v);
  else if (key == "steps_per_epoch") steps_per_epoch = parse_int(key, v);
  else if (key == "grad_steps_per_epoch") grad_steps_per_epoch = parse_int(key, v);
  else if (key == "min_replay") min_replay = parse_int(key, v);
  else if (key == "eval_interval") eval_interval = parse_long(key, v);
  else if (key == "eval_episodes") eval_episodes = parse_int(key, v);
  else if (key == "checkpoint_interval") checkpoint_interval = parse_long(key, v);
  else if (key == "episode_cap") episode_cap = parse_int(key, v);
  else if (key == "reward_scale") reward_scale = parse_double(key, v);
  else if (key == "affordance_scale") affordance_scale = parse_double(key, v);
  else if (key == "aff_tau_reach") aff_tau_reach = parse_double(key, v);
  else if (key == "aff_tau_grasp") aff_tau_grasp = parse_double(key, v);
  else if (key == "aff_tau_push") aff_tau_push = parse_double(key, v);
  else if (key == "tsk_entropy_factor") tsk_entropy_factor = parse_double(key, v);
  else if (key == "sketch_episodes") sketch_episodes = parse_int(key, v);
  else if (key == "stop_success_rate") stop_success_rate = parse_double(key, v);
  else if (key == "transfer_max_attempts") transfer_max_attempts = parse_int(key, v);
  else if (key == "transfer_aff_threshold") transfer_aff_threshold = parse_double(key, v);
  else if (key == "transfer_tail_atomic") transfer_tail_atomic = parse_int(key, v);
  else throw ConfigError(key, "unknown key");
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path, "cannot open config file");
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "expected key=value (line " +
                                  std::to_string(lineno) + ")");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::apply_env_overrides() {
  for (const std::string& key : all_keys()) {
    std::string var = "MAPLE_" + upper_snake(key);
    if (const char* v = std::getenv(var.c_str())) set(key, v);
  }
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ConfigError(key, msg);
  };
  require(method == "maple" || method == "atomic" || method == "nonatomic" ||
              method == "flat" || method == "openloop",
          "method", "unknown method '" + method + "'");
  require(lr > 0, "lr", "must be positive");
  require(alpha_lr > 0, "alpha_lr", "must be positive");
  require(batch_size > 0, "batch_size", "must be positive");
  require(gamma >= 0 && gamma < 1, "gamma", "must be in [0, 1)");
  require(tau_target > 0 && tau_target <= 1, "tau_target", "must be in (0, 1]");
  require(buffer_capacity > 0, "buffer_capacity", "must be positive");
  require(total_env_steps > 0, "total_env_steps", "must be positive");
  require(warmup_env_steps >= 0, "warmup_env_steps", "must not be negative");
  require(steps_per_epoch > 0, "steps_per_epoch", "must be positive");
  require(grad_steps_per_epoch >= 0, "grad_steps_per_epoch",
          "must not be negative");
  require(eval_interval > 0, "eval_interval", "must be positive");
  require(eval_episodes > 0, "eval_episodes", "must be positive");
  require(episode_cap > 0, "episode_cap", "must be positive");
  require(reward_scale > 0, "reward_scale", "must be positive");
  require(affordance_scale >= 0, "affordance_scale", "must not be negative");
  require(aff_tau_reach > 0 && aff_tau_grasp > 0 && aff_tau_push > 0,
          "aff_tau_reach", "affordance thresholds must be positive");
  require(!hidden.empty(), "hidden", "needs at least one layer size");
  for (int h : hidden) require(h > 0, "hidden", "sizes must be positive");
  require(transfer_max_attempts > 0, "transfer_max_attempts",
          "must be positive");
  require(transfer_aff_threshold > 0 && transfer_aff_threshold <= 1,
          "transfer_aff_threshold", "must be in (0, 1]");
  require(transfer_tail_atomic >= 0, "transfer_tail_atomic",
          "must not be negative");
}

std::string ExperimentConfig::describe() const {
  std::ostringstream os;
  os << "task=" << task << "\n";
  os << "method=" << method << "\n";
  os << "seed=" << seed << "\n";
  os << "hidden=";
  for (size_t i = 0; i < hidden.size(); ++i)
    os << (i ? "," : "") << hidden[i];
  os << "\n";
  os << "lr=" << lr << "\n";
  os << "alpha_lr=" << alpha_lr << "\n";
  os << "batch_size=" << batch_size << "\n";
  os << "gamma=" << gamma << "\n";
  os << "tau_target=" << tau_target << "\n";
  os << "twin_critics=" << (twin_critics ? "true" : "false") << "\n";
  os << "final_layer_scale=" << final_layer_scale << "\n";
  os << "init_alpha=" << init_alpha << "\n";
  os << "buffer_capacity=" << buffer_capacity << "\n";
  os << "total_env_steps=" << total_env_steps << "\n";
  os << "warmup_env_steps=" << warmup_env_steps << "\n";
  os << "steps_per_epoch=" << steps_per_epoch << "\n";
  os << "grad_steps_per_epoch=" << grad_steps_per_epoch << "\n";
  os << "min_replay=" << min_replay << "\n";
  os << "eval_interval=" << eval_interval << "\n";
  os << "eval_episodes=" << eval_episodes << "\n";
  os << "checkpoint_interval=" << checkpoint_interval << "\n";
  os << "episode_cap=" << episode_cap << "\n";
  os << "reward_scale=" << reward_scale << "\n";
  os << "affordance_scale=" << affordance_scale << "\n";
  os << "aff_tau_reach=" << aff_tau_reach << "\n";
  os << "aff_tau_grasp=" << aff_tau_grasp << "\n";
  os << "aff_tau_push=" << aff_tau_push << "\n";
  os << "tsk_entropy_factor=" << tsk_entropy_factor << "\n";
  os << "sketch_episodes=" << sketch_episodes << "\n";
  os << "stop_success_rate=" << stop_success_rate << "\n";
  os << "transfer_max_attempts=" << transfer_max_attempts << "\n";
  os << "transfer_aff_threshold=" << transfer_aff_threshold << "\n";
  os << "transfer_tail_atomic=" << transfer_tail_atomic << "\n";
  return os.str();
}

}  // namespace maple
