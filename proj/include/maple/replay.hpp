#pragma once

#include <random>
#include <vector>

#include "maple/core.hpp"

namespace maple {

// One decision-level transition. Rewards are already shaped (affordance
// bonus added) and scaled; params is the full-width policy output.
struct Transition {
  Vec obs;
  int type = 0;
  Vec params;
  double reward = 0.0;
  Vec next_obs;
  bool terminal = false;
  int atomic_steps = 1;          // env steps this decision consumed
  int decision_index = 0;        // position within the episode
  int next_decision_index = 0;
  int next_scheduled_type = -1;  // >= 0 when a fixed schedule picks the next type
};

// Column-packed minibatch view of sampled transitions.
struct Batch {
  Mat obs, next_obs;
  std::vector<int> type;
  Mat params;
  Vec reward;
  std::vector<uint8_t> terminal;
  std::vector<int> decision_index;
  std::vector<int> next_decision_index;
  std::vector<int> next_scheduled_type;

  int size() const { return static_cast<int>(type.size()); }
  static Batch from(const std::vector<const Transition*>& rows);
};

// Uniform-replay ring buffer; the oldest transition is overwritten once the
// capacity is reached.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void add(Transition t);
  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const { return data_[i]; }

  Batch sample(int n, std::mt19937_64& rng) const;

 private:
  size_t capacity_;
  size_t write_ = 0;
  std::vector<Transition> data_;
};

}  // namespace maple
