#pragma once

// Policy-evaluation and PEER losses, their gradients, and bootstrap targets.
// Batches of representations hold one sample per column.

#include "peerlab/rng.hpp"
#include "peerlab/tensor_nn.hpp"

namespace peerlab::peer {

using nn::Matrix;
using nn::Vector;

/// Batch mean of the per-sample inner products <phi_i, target_phi_i>.
/// target_phi comes from the frozen target network and is treated as constant.
double peer_loss(const Matrix& phi, const Matrix& target_phi);

/// d peer_loss / d phi: column i is target_phi_i / batch_size.
Matrix peer_loss_grad(const Matrix& phi, const Matrix& target_phi);

/// Mean squared error between predictions and (constant) targets.
double pe_loss(const Vector& q, const Vector& targets);
Vector pe_loss_grad(const Vector& q, const Vector& targets);

/// pe + beta * peer.
double combined_loss(double pe, double peer, double beta);

/// r + gamma * (1 - done) * max_a q_next_target[a].
double td_target_dqn(double reward, bool done, double gamma, const Vector& q_next_target);

/// r + gamma * (1 - done) * min(q1_next, q2_next).
double td_target_td3(double reward, bool done, double gamma, double q1_next, double q2_next);

/// Target-policy smoothing: add clipped Gaussian noise to each component,
/// then clamp to the action bounds.
Vector smooth_target_action(const Vector& next_action, double noise_std, double noise_clip,
                            double action_low, double action_high, Rng& rng);

}  // namespace peerlab::peer
