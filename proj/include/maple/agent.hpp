#pragma once

#include <memory>
#include <random>
#include <vector>

#include "maple/core.hpp"
#include "maple/net.hpp"
#include "maple/primitives.hpp"
#include "maple/replay.hpp"

namespace maple {

// What the task policy conditions on. DecisionIndex is the open-loop
// variant: only the position within the episode, never the observation.
enum class TaskInput { Observation, DecisionIndex };

struct AgentConfig {
  int obs_dim = 0;
  std::vector<int> hidden = {256, 256};
  double lr = 3e-5;
  double alpha_lr = 3e-5;
  double gamma = 0.99;
  double tau_target = 1e-3;
  bool twin_critics = true;
  double final_layer_scale = 0.01;
  double init_alpha = 1.0;
  TaskInput task_input = TaskInput::Observation;
  int episode_cap = 150;  // used by the decision-index encoding
  // When set, the task policy is never updated and minibatches are expected
  // to carry scheduled next types (sketch-guided training).
  bool freeze_task_policy = false;
};

struct UpdateStats {
  double critic_loss = 0;
  double task_loss = 0;
  double param_loss = 0;
  double alpha_tsk = 0;
  double alpha_p = 0;
  double task_entropy = 0;
  double param_entropy = 0;
};

// Noise drawn up front so losses are deterministic functions of parameters
// (which keeps them finite-difference checkable).
struct CriticNoise {
  Vec type_u;  // uniform draws for the next-state type
  Mat xi;      // n x d_A normal draws for the next-state parameters
};

struct PolicyNoise {
  std::vector<Mat> xi;  // one n x d_A normal draw per primitive
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual ParameterizedAction act(const Vec& obs, int decision_index,
                                  bool greedy, std::mt19937_64& rng) = 0;
  virtual UpdateStats update(const Batch& batch, std::mt19937_64& rng) = 0;
  virtual void set_entropy_targets(double task_target, double param_target) = 0;
  virtual double alpha_tsk() const = 0;
  virtual double alpha_p() const = 0;
  virtual const PrimitiveLibrary& library() const = 0;
  virtual void save(Checkpoint& ck) const = 0;
  virtual void load(const Checkpoint& ck) = 0;
};

// Twin Q networks with slow-moving target copies. Input rows are
// [observation | one-hot type | full-width parameters].
class CriticPair {
 public:
  CriticPair() = default;
  CriticPair(int in_dim, const std::vector<int>& hidden, bool twin,
             std::mt19937_64& rng);

  Vec value(const Mat& X) const;         // min over the online nets
  Vec target_value(const Mat& X) const;  // min over the target nets
  // dLoss/dInput for the min head, accumulating nothing into the critics.
  Mat value_input_grad(const Mat& X, const Vec& d_value) const;

  bool twin() const { return twin_; }
  Mlp& q1() { return q1_; }
  Mlp& q2() { return q2_; }
  const Mlp& q1() const { return q1_; }
  const Mlp& q2() const { return q2_; }
  Mlp& target1() { return t1_; }
  Mlp& target2() { return t2_; }
  const Mlp& target1() const { return t1_; }
  const Mlp& target2() const { return t2_; }

  void track(double tau);

 private:
  bool twin_ = true;
  Mlp q1_, q2_, t1_, t2_;
};

// Hierarchical soft actor-critic over the primitive library: a categorical
// task policy picks the primitive, one tanh-Gaussian sub-network per
// primitive emits the full-width parameters, and the critic scores the pair.
// Policy losses enumerate every primitive exactly instead of sampling it.
class HsacAgent : public Agent {
 public:
  HsacAgent(const AgentConfig& cfg, const PrimitiveLibrary& lib,
            uint64_t seed);

  ParameterizedAction act(const Vec& obs, int decision_index, bool greedy,
                          std::mt19937_64& rng) override;
  Vec sample_params(const Vec& obs, int type, bool greedy,
                    std::mt19937_64& rng) const;
  UpdateStats update(const Batch& batch, std::mt19937_64& rng) override;
  void set_entropy_targets(double task_target, double param_target) override;
  double alpha_tsk() const override { return std::exp(log_alpha_tsk_); }
  double alpha_p() const override { return std::exp(log_alpha_p_); }
  const PrimitiveLibrary& library() const override { return lib_; }
  void save(Checkpoint& ck) const override;
  void load(const Checkpoint& ck) override;

  // Loss surfaces, exposed for gradient verification. Each is deterministic
  // given the pre-drawn noise.
  double critic_loss(const Batch& b, const CriticNoise& noise) const;
  double critic_loss_grads(const Batch& b, const CriticNoise& noise,
                           MlpGrads& g1, MlpGrads& g2) const;
  double task_policy_loss(const Batch& b, const PolicyNoise& noise) const;
  double task_policy_loss_grads(const Batch& b, const PolicyNoise& noise,
                                MlpGrads& g, double* entropy) const;
  double param_policy_loss(const Batch& b, const PolicyNoise& noise) const;
  double param_policy_loss_grads(const Batch& b, const PolicyNoise& noise,
                                 std::vector<MlpGrads>& g,
                                 double* entropy) const;
  // Temperature objectives: alpha * (H_estimate - H_target).
  double alpha_tsk_loss(double task_entropy) const;
  double alpha_p_loss(double param_entropy) const;

  CriticNoise draw_critic_noise(int n, std::mt19937_64& rng) const;
  PolicyNoise draw_policy_noise(int n, std::mt19937_64& rng) const;

  double target_entropy_tsk() const { return target_entropy_tsk_; }
  double target_entropy_p() const { return target_entropy_p_; }
  double log_alpha_tsk_value() const { return log_alpha_tsk_; }
  double log_alpha_p_value() const { return log_alpha_p_; }
  void set_log_alphas(double tsk, double p) {
    log_alpha_tsk_ = tsk;
    log_alpha_p_ = p;
  }

  Mlp& task_net() { return task_net_; }
  Mlp& param_net(int i) { return param_nets_[static_cast<size_t>(i)]; }
  CriticPair& critic() { return critic_; }
  const AgentConfig& config() const { return cfg_; }

  Mat encode_task_input(const Mat& obs,
                        const std::vector<int>& decision_index) const;
  int task_input_dim() const;

 private:
  Mat critic_input(const Mat& obs, const std::vector<int>& types,
                   const Mat& params) const;
  // Per-primitive forward of the parameter heads on the rows that chose the
  // primitive; scatters samples and log-probs back into full-batch storage.
  void next_actions(const Batch& b, const CriticNoise& noise,
                    std::vector<int>& types, Mat& params, Vec& logp_tsk,
                    Vec& logp_p) const;

  AgentConfig cfg_;
  PrimitiveLibrary lib_;
  Mlp task_net_;
  std::vector<Mlp> param_nets_;
  CriticPair critic_;
  Adam opt_task_, opt_q1_, opt_q2_;
  std::vector<Adam> opt_param_;
  double log_alpha_tsk_ = 0.0, log_alpha_p_ = 0.0;
  ScalarAdam opt_alpha_tsk_, opt_alpha_p_;
  double target_entropy_tsk_ = 0.0, target_entropy_p_ = 0.0;
};

// Single-trunk baseline: one network emits the type logits and one shared
// tanh-Gaussian over the parameters; type and parameters are sampled
// independently of each other.
class FlatAgent : public Agent {
 public:
  FlatAgent(const AgentConfig& cfg, const PrimitiveLibrary& lib,
            uint64_t seed);

  ParameterizedAction act(const Vec& obs, int decision_index, bool greedy,
                          std::mt19937_64& rng) override;
  UpdateStats update(const Batch& batch, std::mt19937_64& rng) override;
  void set_entropy_targets(double task_target, double param_target) override;
  double alpha_tsk() const override { return std::exp(log_alpha_tsk_); }
  double alpha_p() const override { return std::exp(log_alpha_p_); }
  const PrimitiveLibrary& library() const override { return lib_; }
  void save(Checkpoint& ck) const override;
  void load(const Checkpoint& ck) override;

  double critic_loss(const Batch& b, const CriticNoise& noise) const;
  double critic_loss_grads(const Batch& b, const CriticNoise& noise,
                           MlpGrads& g1, MlpGrads& g2) const;
  double actor_loss(const Batch& b, const Mat& xi) const;
  double actor_loss_grads(const Batch& b, const Mat& xi, MlpGrads& g,
                          double* task_entropy, double* param_entropy) const;

  Mlp& actor() { return actor_; }
  CriticPair& critic() { return critic_; }

 private:
  AgentConfig cfg_;
  PrimitiveLibrary lib_;
  Mlp actor_;  // obs -> [k logits | mu | log_std]
  CriticPair critic_;
  Adam opt_actor_, opt_q1_, opt_q2_;
  double log_alpha_tsk_ = 0.0, log_alpha_p_ = 0.0;
  ScalarAdam opt_alpha_tsk_, opt_alpha_p_;
  double target_entropy_tsk_ = 0.0, target_entropy_p_ = 0.0;
};

}  // namespace maple
