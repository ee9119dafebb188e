#pragma once

#include <cstddef>
#include <vector>

#include "peerlab/rng.hpp"
#include "peerlab/tensor_nn.hpp"

namespace peerlab::replay {

using nn::Vector;

/// One environment interaction. Discrete actions are stored as a length-1
/// vector holding the action index.
struct Transition {
  Vector state;
  Vector action;
  double reward = 0.0;
  Vector next_state;
  bool done = false;

  bool operator==(const Transition& other) const;
};

/// Fixed-capacity FIFO ring of transitions with uniform sampling (with
/// replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Throws ShapeError when widths disagree with earlier contents or
  /// state/next_state widths differ; NumericError on a non-finite reward.
  void push(Transition t);

  /// batch_size independent uniform draws. Throws ProtocolError when empty.
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }

  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t write_head_ = 0;
  std::vector<Transition> storage_;
};

}  // namespace peerlab::replay
