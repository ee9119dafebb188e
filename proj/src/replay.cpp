#include "peerlab/replay.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "peerlab/errors.hpp"

namespace peerlab::replay {

bool Transition::operator==(const Transition& other) const {
  return state == other.state && action == other.action && reward == other.reward &&
         next_state == other.next_state && done == other.done;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("buffer_capacity", "must be positive");
  storage_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (t.state.size() != t.next_state.size()) {
    throw ShapeError("state width " + std::to_string(t.state.size()) + " != next_state width " +
                     std::to_string(t.next_state.size()));
  }
  if (!std::isfinite(t.reward)) throw NumericError("non-finite reward");
  if (size_ > 0) {
    const Transition& first = storage_.front();
    if (t.state.size() != first.state.size() || t.action.size() != first.action.size()) {
      throw ShapeError("transition widths differ from buffer contents");
    }
  }
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[write_head_] = std::move(t);
  }
  write_head_ = (write_head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw DomainError("replay index " + std::to_string(i) + " out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : write_head_;
  return storage_[(oldest + i) % capacity_];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (size_ == 0) throw ProtocolError("sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> index(0, size_ - 1);
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(storage_[index(rng)]);
  return batch;
}

}  // namespace peerlab::replay
