#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "peerlab/envs.hpp"
#include "peerlab/metrics.hpp"
#include "peerlab/replay.hpp"
#include "peerlab/rng.hpp"
#include "peerlab/tensor_nn.hpp"

namespace peerlab::agents {

using nn::Matrix;
using nn::MlpParams;
using nn::Vector;
using replay::Transition;

struct AgentConfig {
  double gamma = 0.99;
  double eta = 0.005;  // target-network mixing coefficient
  double beta = 5e-4;  // PEER coefficient
  double lr = 1e-4;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  double epsilon = 0.1;
  long warmup_steps = 1000;
  double exploration_noise_std = 0.2;
  double target_noise_std = 0.2;
  double noise_clip = 0.5;
  int policy_delay = 2;
  std::vector<int> hidden_widths{32, 32};
  bool peer_enabled = true;

  /// Grid-world DQN hyperparameters.
  static AgentConfig gridworld();
  /// Continuous-control TD3 hyperparameters.
  static AgentConfig continuous();

  /// Throws ConfigError naming the offending field.
  void validate() const;

  double effective_beta() const { return peer_enabled ? beta : 0.0; }
};

/// Diagnostics from one gradient step, measured on the pre-update networks.
struct TrainStats {
  double pe_loss = 0.0;
  double peer_loss = 0.0;
  double total_loss = 0.0;
  metrics::DrdReport drd;
  double cosine_similarity = 0.0;  // between batch-mean online and target representations
  bool cosine_degenerate = false;
  bool actor_updated = false;
};

/// target <- eta * online + (1 - eta) * target, parameter-wise.
void soft_update(const MlpParams& online, MlpParams& target, double eta);

/// Index of the largest entry; ties go to the lowest index.
int argmax(const Vector& q);

/// Uniform random action with probability epsilon, otherwise argmax(q).
/// Always draws one uniform variate so the stream advances identically.
int select_epsilon_greedy(const Vector& q, double epsilon, Rng& rng);

/// DQN over a state-only encoder: obs -> hidden... -> one Q value per action,
/// bias-free final layer so Q = <Phi(s), W_last>.
class DqnAgent {
 public:
  DqnAgent(int obs_dim, int num_actions, AgentConfig config, std::uint64_t init_seed);

  Vector q_values(const Vector& obs) const;
  int act_greedy(const Vector& obs) const;
  int act_epsilon_greedy(const Vector& obs, double epsilon, Rng& rng) const;

  /// One Adam step on pe_loss + beta * peer_loss followed by a soft target update.
  TrainStats train_step(std::span<const Transition> batch);

  const MlpParams& online() const { return online_; }
  const MlpParams& target() const { return target_; }
  void set_online(MlpParams params);
  void set_target(MlpParams params);
  const AgentConfig& config() const { return config_; }
  std::uint64_t train_steps() const { return train_steps_; }
  int num_actions() const { return num_actions_; }

 private:
  AgentConfig config_;
  int obs_dim_;
  int num_actions_;
  MlpParams online_;
  MlpParams target_;
  nn::AdamState adam_;
  std::uint64_t train_steps_ = 0;
};

struct ActionBounds {
  double low = -1.0;
  double high = 1.0;
};

/// TD3 with twin critics over concat(obs, action); both critics carry the
/// PEER term against their own target critic.
class Td3Agent {
 public:
  Td3Agent(int obs_dim, int action_dim, ActionBounds bounds, AgentConfig config, std::uint64_t init_seed);

  /// Actor output, plus N(0, noise_std) clipped to the bounds unless deterministic.
  Vector act(const Vector& obs, double noise_std, Rng& rng, bool deterministic) const;
  Vector act_deterministic(const Vector& obs) const;

  /// Critic step; every policy_delay-th call also updates the actor and
  /// soft-updates all target networks. rng drives target-policy smoothing.
  TrainStats train_step(std::span<const Transition> batch, Rng& rng);

  const MlpParams& actor() const { return actor_; }
  const MlpParams& actor_target() const { return actor_target_; }
  const MlpParams& critic(int i) const { return critics_.at(i); }
  const MlpParams& critic_target(int i) const { return critic_targets_.at(i); }
  void set_actor(MlpParams params, bool also_target);
  void set_critic(int i, MlpParams params, bool also_target);

  const AgentConfig& config() const { return config_; }
  ActionBounds bounds() const { return bounds_; }
  std::uint64_t train_steps() const { return train_steps_; }

  /// Squash raw actor outputs into the action box.
  Matrix scale_actions(const Matrix& raw) const;

 private:
  AgentConfig config_;
  int obs_dim_;
  int action_dim_;
  ActionBounds bounds_;
  MlpParams actor_;
  MlpParams actor_target_;
  std::array<MlpParams, 2> critics_;
  std::array<MlpParams, 2> critic_targets_;
  nn::AdamState actor_adam_;
  std::array<nn::AdamState, 2> critic_adam_;
  std::uint64_t train_steps_ = 0;
};

/// Mean undiscounted return of the greedy policy.
double evaluate(const DqnAgent& agent, envs::GridWorld& env, int episodes);

/// Mean undiscounted return of the noise-free actor.
double evaluate(const Td3Agent& agent, envs::Pendulum& env, int episodes, Rng& rng);

/// Mean undiscounted return of an arbitrary torque policy (obs, rng) -> torque.
template <typename Policy>
double evaluate_pendulum_policy(Policy&& policy, envs::Pendulum& env, int episodes, Rng& rng) {
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Vector obs = env.reset(rng);
    bool done = false;
    while (!done) {
      const auto step = env.step(policy(obs, rng));
      total += step.reward;
      obs = step.observation;
      done = step.done;
    }
  }
  return total / episodes;
}

}  // namespace peerlab::agents
