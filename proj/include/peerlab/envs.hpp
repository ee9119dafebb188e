#pragma once

#include "peerlab/rng.hpp"
#include "peerlab/tensor_nn.hpp"

namespace peerlab::envs {

using nn::Vector;

inline constexpr int kEpisodeCap = 200;

struct StepResult {
  Vector observation;
  double reward = 0.0;
  bool done = false;      // episode over, for either reason below
  bool terminal = false;  // reached an absorbing state (not a time-limit cut)
};

/// 4 rows x 5 columns, cells numbered row-major 0..19. The episode starts in
/// the top-left cell; entering the bottom-right cell pays 10 and ends it.
class GridWorld {
 public:
  static constexpr int kWidth = 5;
  static constexpr int kHeight = 4;
  static constexpr int kNumStates = kWidth * kHeight;
  static constexpr int kNumActions = 4;
  static constexpr int kStartCell = 0;
  static constexpr int kTerminalCell = 19;
  static constexpr int kS1Cell = 18;
  static constexpr int kS2Cell = 17;
  static constexpr int kShortestPath = 7;
  static constexpr double kGoalReward = 10.0;

  enum Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

  Vector reset();
  StepResult step(int action);

  int state() const { return state_; }
  int step_count() const { return step_count_; }
  bool done() const { return done_; }

  /// Places the agent on an arbitrary non-terminal cell (testing, probes).
  void set_state(int cell);

  static Vector one_hot(int cell);

 private:
  int state_ = kStartCell;
  int step_count_ = 0;
  bool done_ = false;
};

/// Torque-driven pendulum swing-up: theta = 0 is upright; observation is
/// [cos theta, sin theta, theta_dot].
class Pendulum {
 public:
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kDt = 0.05;
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr int kObsDim = 3;
  static constexpr int kActionDim = 1;

  Vector reset(Rng& rng);
  StepResult step(double torque);

  void set_state(double theta, double theta_dot);
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }
  int step_count() const { return step_count_; }
  bool done() const { return done_; }
  Vector observation() const;

 private:
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
  int step_count_ = 0;
  bool done_ = false;
};

/// Maps an angle to (-pi, pi].
double wrap_angle(double theta);

}  // namespace peerlab::envs
