#include "peerlab/peer_core.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "peerlab/errors.hpp"

namespace peerlab::peer {
namespace {

void check_pair(const Matrix& phi, const Matrix& target_phi) {
  if (phi.cols() != target_phi.cols()) {
    throw ShapeError("batch sizes differ: " + std::to_string(phi.cols()) + " vs " +
                     std::to_string(target_phi.cols()));
  }
  if (phi.rows() != target_phi.rows()) {
    throw ShapeError("representation widths differ: " + std::to_string(phi.rows()) + " vs " +
                     std::to_string(target_phi.rows()));
  }
  if (phi.cols() == 0) throw DomainError("empty batch");
}

void check_pair(const Vector& q, const Vector& targets) {
  if (q.size() != targets.size()) {
    throw ShapeError("prediction and target lengths differ: " + std::to_string(q.size()) + " vs " +
                     std::to_string(targets.size()));
  }
  if (q.size() == 0) throw DomainError("empty batch");
}

}  // namespace

double peer_loss(const Matrix& phi, const Matrix& target_phi) {
  check_pair(phi, target_phi);
  return (phi.array() * target_phi.array()).colwise().sum().mean();
}

Matrix peer_loss_grad(const Matrix& phi, const Matrix& target_phi) {
  check_pair(phi, target_phi);
  return target_phi / static_cast<double>(phi.cols());
}

double pe_loss(const Vector& q, const Vector& targets) {
  check_pair(q, targets);
  return (q - targets).squaredNorm() / static_cast<double>(q.size());
}

Vector pe_loss_grad(const Vector& q, const Vector& targets) {
  check_pair(q, targets);
  return 2.0 * (q - targets) / static_cast<double>(q.size());
}

double combined_loss(double pe, double peer, double beta) {
  if (beta < 0.0) throw DomainError("beta must be non-negative");
  return pe + beta * peer;
}

double td_target_dqn(double reward, bool done, double gamma, const Vector& q_next_target) {
  if (q_next_target.size() == 0) throw DomainError("empty action-value vector");
  if (done) return reward;
  return reward + gamma * q_next_target.maxCoeff();
}

double td_target_td3(double reward, bool done, double gamma, double q1_next, double q2_next) {
  if (done) return reward;
  return reward + gamma * std::min(q1_next, q2_next);
}

Vector smooth_target_action(const Vector& next_action, double noise_std, double noise_clip,
                            double action_low, double action_high, Rng& rng) {
  Vector out = next_action;
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out[i] += std::clamp(noise(rng), -noise_clip, noise_clip);
    }
  }
  return out.cwiseMax(action_low).cwiseMin(action_high);
}

}  // namespace peerlab::peer
