#pragma once

// Representation diagnostics: normalization, cosine similarity, the upper
// bound on adjacent-step representation similarity, the distinguishable
// representation discrepancy (DRD), and the max-Q gap between two states.

#include "peerlab/tensor_nn.hpp"

namespace peerlab::metrics {

using nn::Matrix;
using nn::Vector;

inline constexpr double kDegenerateNorm = 1e-12;

struct Normalized {
  Vector value;
  bool degenerate = false;  // input norm below kDegenerateNorm; value is zero
};

Normalized l2_normalize(const Vector& v);

struct Cosine {
  double value = 0.0;
  bool degenerate = false;  // one side is (numerically) zero; value is 0
};

/// <u,v>/(|u||v|) clamped to [-1, 1]. Throws ShapeError on length mismatch.
Cosine cosine_similarity(const Vector& u, const Vector& v);

/// 1/gamma - r^2 / (2 |last|^2). Throws DegenerateNetworkError when
/// last_layer_norm is zero.
double theorem1_bound(double reward, double gamma, double last_layer_norm);

struct DrdReport {
  double mean_similarity = 0.0;
  double mean_bound = 0.0;
  double mean_drd = 0.0;
  int batch_size = 0;
  int degenerate_rows = 0;

  /// The distinguishable representation property holds on this batch.
  bool satisfied() const { return mean_drd <= 0.0; }
};

/// Per sample: normalize both representations, take their inner product and
/// subtract theorem1_bound(r_i, gamma, last_layer_norm); report batch means.
/// Rows with a zero representation contribute similarity 0 and are counted.
DrdReport drd_batch(const Matrix& phi, const Matrix& target_phi_next, const Vector& rewards, double gamma,
                    double last_layer_norm);

/// max(q_s1) - max(q_s2).
double q_gap(const Vector& q_s1, const Vector& q_s2);

}  // namespace peerlab::metrics
