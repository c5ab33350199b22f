#include "maple/replay.hpp"

#include <stdexcept>

namespace maple {

Batch Batch::from(const std::vector<const Transition*>& rows) {
  if (rows.empty()) throw std::invalid_argument("empty batch");
  int n = static_cast<int>(rows.size());
  Eigen::Index obs_dim = rows[0]->obs.size();
  Eigen::Index param_dim = rows[0]->params.size();
  Batch b;
  b.obs.resize(n, obs_dim);
  b.next_obs.resize(n, obs_dim);
  b.params.resize(n, param_dim);
  b.reward.resize(n);
  b.type.resize(static_cast<size_t>(n));
  b.terminal.resize(static_cast<size_t>(n));
  b.decision_index.resize(static_cast<size_t>(n));
  b.next_decision_index.resize(static_cast<size_t>(n));
  b.next_scheduled_type.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Transition& t = *rows[static_cast<size_t>(i)];
    if (t.obs.size() != obs_dim || t.params.size() != param_dim)
      throw std::invalid_argument("ragged transitions in batch");
    b.obs.row(i) = t.obs.transpose();
    b.next_obs.row(i) = t.next_obs.transpose();
    b.params.row(i) = t.params.transpose();
    b.reward[i] = t.reward;
    b.type[static_cast<size_t>(i)] = t.type;
    b.terminal[static_cast<size_t>(i)] = t.terminal ? 1 : 0;
    b.decision_index[static_cast<size_t>(i)] = t.decision_index;
    b.next_decision_index[static_cast<size_t>(i)] = t.next_decision_index;
    b.next_scheduled_type[static_cast<size_t>(i)] = t.next_scheduled_type;
  }
  return b;
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("capacity must be positive");
  data_.reserve(std::min(capacity, size_t(1) << 20));
}

void ReplayBuffer::add(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[write_] = std::move(t);
  }
  write_ = (write_ + 1) % capacity_;
}

Batch ReplayBuffer::sample(int n, std::mt19937_64& rng) const {
  if (data_.empty()) throw std::invalid_argument("sampling empty buffer");
  std::vector<const Transition*> rows;
  rows.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    size_t j = static_cast<size_t>(rng() % data_.size());
    rows.push_back(&data_[j]);
  }
  return Batch::from(rows);
}

}  // namespace maple
