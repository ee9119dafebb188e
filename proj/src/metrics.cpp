#include "peerlab/metrics.hpp"

#include <algorithm>
#include <string>

#include "peerlab/errors.hpp"

namespace peerlab::metrics {

Normalized l2_normalize(const Vector& v) {
  const double norm = v.norm();
  if (norm < kDegenerateNorm) return {Vector::Zero(v.size()), true};
  return {v / norm, false};
}

Cosine cosine_similarity(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw ShapeError("cosine similarity of vectors with lengths " + std::to_string(u.size()) + " and " +
                     std::to_string(v.size()));
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < kDegenerateNorm || nv < kDegenerateNorm) return {0.0, true};
  return {std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0), false};
}

double theorem1_bound(double reward, double gamma, double last_layer_norm) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  if (!(last_layer_norm > 0.0)) throw DegenerateNetworkError("last-layer weight norm is zero");
  return 1.0 / gamma - reward * reward / (2.0 * last_layer_norm * last_layer_norm);
}

DrdReport drd_batch(const Matrix& phi, const Matrix& target_phi_next, const Vector& rewards, double gamma,
                    double last_layer_norm) {
  if (phi.rows() != target_phi_next.rows() || phi.cols() != target_phi_next.cols()) {
    throw ShapeError("representation batches are not congruent");
  }
  if (rewards.size() != phi.cols()) {
    throw ShapeError("reward count " + std::to_string(rewards.size()) + " != batch size " +
                     std::to_string(phi.cols()));
  }
  if (phi.cols() == 0) throw DomainError("empty batch");

  const auto n = phi.cols();
  const Eigen::RowVectorXd norm_a = phi.colwise().norm();
  const Eigen::RowVectorXd norm_b = target_phi_next.colwise().norm();
  const Eigen::RowVectorXd dots = (phi.array() * target_phi_next.array()).colwise().sum();

  DrdReport report;
  report.batch_size = static_cast<int>(n);
  double sim_sum = 0.0;
  double bound_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (norm_a[i] < kDegenerateNorm || norm_b[i] < kDegenerateNorm) {
      ++report.degenerate_rows;
    } else {
      sim_sum += std::clamp(dots[i] / (norm_a[i] * norm_b[i]), -1.0, 1.0);
    }
    bound_sum += theorem1_bound(rewards[i], gamma, last_layer_norm);
  }
  report.mean_similarity = sim_sum / static_cast<double>(n);
  report.mean_bound = bound_sum / static_cast<double>(n);
  report.mean_drd = report.mean_similarity - report.mean_bound;
  return report;
}

double q_gap(const Vector& q_s1, const Vector& q_s2) {
  if (q_s1.size() == 0 || q_s2.size() == 0) throw DomainError("empty action-value vector");
  return q_s1.maxCoeff() - q_s2.maxCoeff();
}

}  // namespace peerlab::metrics
