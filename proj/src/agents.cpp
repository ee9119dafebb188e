#include "peerlab/agents.hpp"

#include <cmath>
#include <random>
#include <string>

#include "peerlab/errors.hpp"
#include "peerlab/peer_core.hpp"

namespace peerlab::agents {
namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

nn::AdamHyper adam_hyper(const AgentConfig& c) { return {.lr = c.lr, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8}; }

void require_finite(double loss, const char* what) {
  if (!std::isfinite(loss)) throw NumericError(std::string("non-finite ") + what);
}

struct Batch {
  Matrix states;
  Matrix actions;
  Vector rewards;
  Matrix next_states;
  std::vector<bool> dones;
};

Batch stack(std::span<const Transition> batch) {
  if (batch.empty()) throw DomainError("empty training batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto obs_dim = batch.front().state.size();
  const auto act_dim = batch.front().action.size();
  Batch b;
  b.states.resize(obs_dim, n);
  b.next_states.resize(obs_dim, n);
  b.actions.resize(act_dim, n);
  b.rewards.resize(n);
  b.dones.resize(batch.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = batch[static_cast<std::size_t>(i)];
    if (t.state.size() != obs_dim || t.next_state.size() != obs_dim || t.action.size() != act_dim) {
      throw ShapeError("inconsistent transition widths within batch");
    }
    b.states.col(i) = t.state;
    b.next_states.col(i) = t.next_state;
    b.actions.col(i) = t.action;
    b.rewards[i] = t.reward;
    b.dones[static_cast<std::size_t>(i)] = t.done;
  }
  return b;
}

Matrix concat_rows(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

void mix(Matrix& target, const Matrix& online, double eta) { target = eta * online + (1.0 - eta) * target; }
void mix(Vector& target, const Vector& online, double eta) { target = eta * online + (1.0 - eta) * target; }

}  // namespace

AgentConfig AgentConfig::gridworld() { return AgentConfig{}; }

AgentConfig AgentConfig::continuous() {
  AgentConfig c;
  c.lr = 3e-4;
  c.batch_size = 256;
  c.buffer_capacity = 1000000;
  c.warmup_steps = 25000;
  c.hidden_widths = {256, 256};
  return c;
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "must lie in (0, 1]");
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta", "must lie in (0, 1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta", "must be finite and >= 0");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr", "must be positive");
  if (batch_size < 1) throw ConfigError("batch_size", "must be positive");
  if (buffer_capacity < 1) throw ConfigError("buffer_capacity", "must be positive");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon", "must lie in [0, 1]");
  if (warmup_steps < 0) throw ConfigError("warmup_steps", "must be >= 0");
  if (!(exploration_noise_std >= 0.0)) throw ConfigError("exploration_noise_std", "must be >= 0");
  if (!(target_noise_std >= 0.0)) throw ConfigError("target_noise_std", "must be >= 0");
  if (!(noise_clip >= 0.0)) throw ConfigError("noise_clip", "must be >= 0");
  if (policy_delay < 1) throw ConfigError("policy_delay", "must be >= 1");
  if (hidden_widths.empty()) throw ConfigError("hidden_widths", "need at least one hidden layer");
  for (int w : hidden_widths) {
    if (w < 1) throw ConfigError("hidden_widths", "widths must be positive");
  }
}

void soft_update(const MlpParams& online, MlpParams& target, double eta) {
  if (!nn::same_shape(online, target)) throw ShapeError("soft update between incongruent networks");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
  for (std::size_t k = 0; k < online.layers.size(); ++k) {
    mix(target.layers[k].weights, online.layers[k].weights, eta);
    if (online.layers[k].bias) mix(*target.layers[k].bias, *online.layers[k].bias, eta);
  }
}

int argmax(const Vector& q) {
  if (q.size() == 0) throw DomainError("argmax of an empty vector");
  int best = 0;
  for (int i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

int select_epsilon_greedy(const Vector& q, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0, 1]");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(q.size()) - 1);
    return pick(rng);
  }
  return argmax(q);
}

// ---------------------------------------------------------------- DQN

DqnAgent::DqnAgent(int obs_dim, int num_actions, AgentConfig config, std::uint64_t init_seed)
    : config_(std::move(config)), obs_dim_(obs_dim), num_actions_(num_actions) {
  config_.validate();
  const auto sizes = layer_sizes(obs_dim, config_.hidden_widths, num_actions);
  online_ = nn::init_mlp(sizes, init_seed, /*final_bias=*/false);
  target_ = online_;
  adam_ = nn::init_adam(online_);
}

void DqnAgent::set_online(MlpParams params) {
  params.validate();
  if (!nn::same_shape(params, online_)) throw ShapeError("replacement online network has a different shape");
  online_ = std::move(params);
}

void DqnAgent::set_target(MlpParams params) {
  params.validate();
  if (!nn::same_shape(params, target_)) throw ShapeError("replacement target network has a different shape");
  target_ = std::move(params);
}

Vector DqnAgent::q_values(const Vector& obs) const { return nn::forward(online_, obs).output; }

int DqnAgent::act_greedy(const Vector& obs) const { return argmax(q_values(obs)); }

int DqnAgent::act_epsilon_greedy(const Vector& obs, double epsilon, Rng& rng) const {
  return select_epsilon_greedy(q_values(obs), epsilon, rng);
}

TrainStats DqnAgent::train_step(std::span<const Transition> batch) {
  const Batch b = stack(batch);
  const auto n = b.states.cols();
  if (b.states.rows() != obs_dim_) throw ShapeError("observation width does not match the Q-network");

  const nn::ForwardTrace online = nn::forward_batch(online_, b.states);
  const nn::ForwardTrace next = nn::forward_batch(target_, b.next_states);

  Vector q_taken(n);
  Vector targets(n);
  std::vector<int> taken(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = static_cast<int>(b.actions(0, i));
    if (a < 0 || a >= num_actions_) throw DomainError("stored action " + std::to_string(a) + " out of range");
    taken[static_cast<std::size_t>(i)] = a;
    q_taken[i] = online.output()(a, i);
    targets[i] = peer::td_target_dqn(b.rewards[i], b.dones[static_cast<std::size_t>(i)], config_.gamma,
                                     next.output().col(i));
  }

  const Matrix& phi = online.representation();
  const Matrix& phi_next = next.representation();
  const double beta = config_.effective_beta();

  TrainStats stats;
  stats.pe_loss = peer::pe_loss(q_taken, targets);
  stats.peer_loss = peer::peer_loss(phi, phi_next);
  stats.total_loss = peer::combined_loss(stats.pe_loss, stats.peer_loss, beta);
  require_finite(stats.total_loss, "DQN loss");
  stats.drd = metrics::drd_batch(phi, phi_next, b.rewards, config_.gamma, nn::last_layer_norm(online_));
  const auto cos = metrics::cosine_similarity(phi.rowwise().mean(), phi_next.rowwise().mean());
  stats.cosine_similarity = cos.value;
  stats.cosine_degenerate = cos.degenerate;

  const Vector dq = peer::pe_loss_grad(q_taken, targets);
  Matrix output_grad = Matrix::Zero(num_actions_, n);
  for (Eigen::Index i = 0; i < n; ++i) output_grad(taken[static_cast<std::size_t>(i)], i) = dq[i];

  const nn::Gradients grads =
      beta > 0.0 ? nn::backward(online_, online, output_grad, beta * peer::peer_loss_grad(phi, phi_next))
                 : nn::backward(online_, online, output_grad);
  nn::adam_step(online_, grads, adam_, adam_hyper(config_));
  soft_update(online_, target_, config_.eta);
  ++train_steps_;
  return stats;
}

// ---------------------------------------------------------------- TD3

Td3Agent::Td3Agent(int obs_dim, int action_dim, ActionBounds bounds, AgentConfig config, std::uint64_t init_seed)
    : config_(std::move(config)), obs_dim_(obs_dim), action_dim_(action_dim), bounds_(bounds) {
  config_.validate();
  if (!(bounds.low < bounds.high)) throw ConfigError("action_bounds", "low must be below high");
  Rng seeds(init_seed);
  actor_ = nn::init_mlp(layer_sizes(obs_dim, config_.hidden_widths, action_dim), seeds(), /*final_bias=*/true);
  actor_target_ = actor_;
  actor_adam_ = nn::init_adam(actor_);
  for (int i = 0; i < 2; ++i) {
    critics_[i] = nn::init_mlp(layer_sizes(obs_dim + action_dim, config_.hidden_widths, 1), seeds(),
                               /*final_bias=*/false);
    critic_targets_[i] = critics_[i];
    critic_adam_[i] = nn::init_adam(critics_[i]);
  }
}

void Td3Agent::set_actor(MlpParams params, bool also_target) {
  params.validate();
  if (!nn::same_shape(params, actor_)) throw ShapeError("replacement actor has a different shape");
  actor_ = std::move(params);
  if (also_target) actor_target_ = actor_;
}

void Td3Agent::set_critic(int i, MlpParams params, bool also_target) {
  params.validate();
  if (!nn::same_shape(params, critics_.at(i))) throw ShapeError("replacement critic has a different shape");
  critics_[i] = std::move(params);
  if (also_target) critic_targets_[i] = critics_[i];
}

Matrix Td3Agent::scale_actions(const Matrix& raw) const {
  const double center = 0.5 * (bounds_.high + bounds_.low);
  const double half = 0.5 * (bounds_.high - bounds_.low);
  return (center + half * raw.array().tanh()).matrix();
}

Vector Td3Agent::act_deterministic(const Vector& obs) const {
  if (obs.size() != obs_dim_) throw ShapeError("observation width does not match the actor");
  return scale_actions(nn::forward(actor_, obs).output);
}

Vector Td3Agent::act(const Vector& obs, double noise_std, Rng& rng, bool deterministic) const {
  Vector a = act_deterministic(obs);
  if (deterministic || noise_std <= 0.0) return a;
  std::normal_distribution<double> noise(0.0, noise_std);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += noise(rng);
  return a.cwiseMax(bounds_.low).cwiseMin(bounds_.high);
}

TrainStats Td3Agent::train_step(std::span<const Transition> batch, Rng& rng) {
  const Batch b = stack(batch);
  const auto n = b.states.cols();
  if (b.states.rows() != obs_dim_ || b.actions.rows() != action_dim_) {
    throw ShapeError("transition widths do not match the agent");
  }

  // Smoothed target actions and bootstrap targets, all from target networks.
  Matrix next_actions = scale_actions(nn::forward_batch(actor_target_, b.next_states).output());
  for (Eigen::Index i = 0; i < n; ++i) {
    next_actions.col(i) = peer::smooth_target_action(next_actions.col(i), config_.target_noise_std,
                                                     config_.noise_clip, bounds_.low, bounds_.high, rng);
  }
  const Matrix next_inputs = concat_rows(b.next_states, next_actions);
  const std::array<nn::ForwardTrace, 2> next = {nn::forward_batch(critic_targets_[0], next_inputs),
                                                nn::forward_batch(critic_targets_[1], next_inputs)};
  Vector targets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    targets[i] = peer::td_target_td3(b.rewards[i], b.dones[static_cast<std::size_t>(i)], config_.gamma,
                                     next[0].output()(0, i), next[1].output()(0, i));
  }

  const Matrix inputs = concat_rows(b.states, b.actions);
  const double beta = config_.effective_beta();
  TrainStats stats;
  for (int c = 0; c < 2; ++c) {
    const nn::ForwardTrace trace = nn::forward_batch(critics_[c], inputs);
    const Vector q = trace.output().row(0).transpose();
    const Matrix& phi = trace.representation();
    const Matrix& phi_next = next[c].representation();
    const double pe = peer::pe_loss(q, targets);
    const double peer_term = peer::peer_loss(phi, phi_next);
    const double total = peer::combined_loss(pe, peer_term, beta);
    require_finite(total, "critic loss");
    stats.pe_loss += 0.5 * pe;
    stats.peer_loss += 0.5 * peer_term;
    stats.total_loss += 0.5 * total;
    if (c == 0) {
      stats.drd = metrics::drd_batch(phi, phi_next, b.rewards, config_.gamma, nn::last_layer_norm(critics_[0]));
      const auto cos = metrics::cosine_similarity(phi.rowwise().mean(), phi_next.rowwise().mean());
      stats.cosine_similarity = cos.value;
      stats.cosine_degenerate = cos.degenerate;
    }
    const Matrix output_grad = peer::pe_loss_grad(q, targets).transpose();
    const nn::Gradients grads =
        beta > 0.0 ? nn::backward(critics_[c], trace, output_grad, beta * peer::peer_loss_grad(phi, phi_next))
                   : nn::backward(critics_[c], trace, output_grad);
    nn::adam_step(critics_[c], grads, critic_adam_[c], adam_hyper(config_));
  }
  ++train_steps_;

  if (train_steps_ % static_cast<std::uint64_t>(config_.policy_delay) == 0) {
    // Actor ascends critic 1: minimize -mean Q1(s, pi(s)).
    const nn::ForwardTrace actor_trace = nn::forward_batch(actor_, b.states);
    const Matrix tanh_out = actor_trace.output().array().tanh().matrix();
    const double half = 0.5 * (bounds_.high - bounds_.low);
    const Matrix policy_actions = (0.5 * (bounds_.high + bounds_.low) + half * tanh_out.array()).matrix();
    const nn::ForwardTrace q_trace = nn::forward_batch(critics_[0], concat_rows(b.states, policy_actions));
    require_finite(q_trace.output().mean(), "actor objective");
    const Matrix dq = Matrix::Constant(1, n, -1.0 / static_cast<double>(n));
    const nn::Gradients critic_grads = nn::backward(critics_[0], q_trace, dq);
    const Matrix d_action = critic_grads.input.bottomRows(action_dim_);
    const Matrix d_raw = (d_action.array() * half * (1.0 - tanh_out.array().square())).matrix();
    nn::adam_step(actor_, nn::backward(actor_, actor_trace, d_raw), actor_adam_, adam_hyper(config_));

    soft_update(actor_, actor_target_, config_.eta);
    soft_update(critics_[0], critic_targets_[0], config_.eta);
    soft_update(critics_[1], critic_targets_[1], config_.eta);
    stats.actor_updated = true;
  }
  return stats;
}

// ---------------------------------------------------------------- evaluation

double evaluate(const DqnAgent& agent, envs::GridWorld& env, int episodes) {
  if (episodes < 1) throw DomainError("episodes must be >= 1");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Vector obs = env.reset();
    bool done = false;
    while (!done) {
      const auto step = env.step(agent.act_greedy(obs));
      total += step.reward;
      obs = step.observation;
      done = step.done;
    }
  }
  return total / episodes;
}

double evaluate(const Td3Agent& agent, envs::Pendulum& env, int episodes, Rng& rng) {
  if (episodes < 1) throw DomainError("episodes must be >= 1");
  return evaluate_pendulum_policy([&](const Vector& obs, Rng&) { return agent.act_deterministic(obs)[0]; }, env,
                                  episodes, rng);
}

}  // namespace peerlab::agents
