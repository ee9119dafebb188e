#include "peerlab/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "peerlab/errors.hpp"

namespace peerlab::envs {

Vector GridWorld::one_hot(int cell) {
  Vector v = Vector::Zero(kNumStates);
  v[cell] = 1.0;
  return v;
}

Vector GridWorld::reset() {
  state_ = kStartCell;
  step_count_ = 0;
  done_ = false;
  return one_hot(state_);
}

void GridWorld::set_state(int cell) {
  if (cell < 0 || cell >= kNumStates || cell == kTerminalCell) {
    throw DomainError("cannot place agent on cell " + std::to_string(cell));
  }
  state_ = cell;
  done_ = false;
}

StepResult GridWorld::step(int action) {
  if (action < 0 || action >= kNumActions) throw DomainError("grid action " + std::to_string(action));
  if (done_) throw ProtocolError("step on a finished grid-world episode");

  int row = state_ / kWidth;
  int col = state_ % kWidth;
  switch (action) {
    case kUp: row = std::max(row - 1, 0); break;
    case kDown: row = std::min(row + 1, kHeight - 1); break;
    case kLeft: col = std::max(col - 1, 0); break;
    case kRight: col = std::min(col + 1, kWidth - 1); break;
  }
  state_ = row * kWidth + col;
  ++step_count_;

  StepResult result;
  if (state_ == kTerminalCell) {
    result.reward = kGoalReward;
    result.terminal = true;
  }
  result.done = result.terminal || step_count_ >= kEpisodeCap;
  done_ = result.done;
  result.observation = one_hot(state_);
  return result;
}

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double w = std::fmod(theta + pi, 2.0 * pi);
  if (w <= 0.0) w += 2.0 * pi;
  return w - pi;
}

Vector Pendulum::observation() const { return Vector{{std::cos(theta_), std::sin(theta_), theta_dot_}}; }

Vector Pendulum::reset(Rng& rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> speed(-1.0, 1.0);
  theta_ = angle(rng);
  theta_dot_ = speed(rng);
  step_count_ = 0;
  done_ = false;
  return observation();
}

void Pendulum::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = std::clamp(theta_dot, -kMaxSpeed, kMaxSpeed);
  done_ = false;
}

StepResult Pendulum::step(double torque) {
  if (done_) throw ProtocolError("step on a finished pendulum episode");
  if (!std::isfinite(torque)) throw NumericError("non-finite torque");
  const double u = std::clamp(torque, -kMaxTorque, kMaxTorque);
  const double angle = wrap_angle(theta_);

  StepResult result;
  result.reward = -(angle * angle + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);

  const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) + 3.0 / (kMass * kLength * kLength) * u;
  theta_dot_ = std::clamp(theta_dot_ + accel * kDt, -kMaxSpeed, kMaxSpeed);
  theta_ += theta_dot_ * kDt;
  ++step_count_;

  result.done = step_count_ >= kEpisodeCap;
  done_ = result.done;
  result.observation = observation();
  return result;
}

}  // namespace peerlab::envs
