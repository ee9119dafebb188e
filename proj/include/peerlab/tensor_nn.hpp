#pragma once

// Dense multilayer perceptrons with ReLU hidden layers, reverse-mode
// gradients and Adam. Batched quantities store one sample per column.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace peerlab::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct LayerParams {
  Matrix weights;              // rows = output width, cols = input width
  std::optional<Vector> bias;  // length = output width

  Eigen::Index input_width() const { return weights.cols(); }
  Eigen::Index output_width() const { return weights.rows(); }
};

/// Layered weights. Every layer but the last is followed by ReLU; the last is
/// linear. The penultimate activation is the representation, so for a value
/// head without final bias the output is exactly <representation, last weights>.
struct MlpParams {
  std::vector<LayerParams> layers;

  Eigen::Index input_width() const { return layers.front().input_width(); }
  Eigen::Index output_width() const { return layers.back().output_width(); }
  Eigen::Index representation_width() const { return layers.back().input_width(); }
  bool has_final_bias() const { return layers.back().bias.has_value(); }
  std::size_t parameter_count() const;

  /// Throws ShapeError on width mismatch between layers or bias length,
  /// NumericError on non-finite entries.
  void validate() const;
};

/// Per-parameter partial derivatives, laid out like the MlpParams they came
/// from, plus the derivative with respect to the network input.
struct Gradients {
  std::vector<LayerParams> layers;
  Matrix input;

  bool all_finite() const;
};

/// Activations retained from one (batched) forward pass.
struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activation of each layer
  std::vector<Matrix> post;  // post-activation; post.back() is the output

  Eigen::Index batch_size() const { return input.cols(); }
  const Matrix& output() const { return post.back(); }
  /// Post-ReLU activation of the penultimate layer (the input itself for a
  /// single-layer network).
  const Matrix& representation() const {
    return post.size() >= 2 ? post[post.size() - 2] : input;
  }
};

struct ForwardResult {
  Vector representation;
  Vector output;
  ForwardTrace trace;
};

struct AdamState {
  std::vector<LayerParams> first_moment;
  std::vector<LayerParams> second_moment;
  std::uint64_t step = 0;
};

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Kaiming-uniform weights (bound sqrt(6/fan_in)) on ReLU layers, unit-gain
/// uniform (bound sqrt(3/fan_in)) on the final linear layer, zero biases.
/// Throws ConfigError for fewer than two sizes or a non-positive width.
MlpParams init_mlp(std::span<const int> layer_sizes, std::uint64_t seed, bool final_bias);

ForwardResult forward(const MlpParams& params, const Vector& input);
ForwardTrace forward_batch(const MlpParams& params, const Matrix& inputs);

/// Gradient of sum(output_grad .* output) with respect to every parameter and
/// the input. The ReLU subgradient at 0 is 0.
Gradients backward(const MlpParams& params, const ForwardTrace& trace, const Matrix& output_grad);

/// As above, with an additional gradient injected at the representation
/// (penultimate activation), used by losses defined directly on it.
Gradients backward(const MlpParams& params, const ForwardTrace& trace, const Matrix& output_grad,
                   const Matrix& representation_grad);

Gradients zero_gradients(const MlpParams& params);

AdamState init_adam(const MlpParams& params);

/// Bias-corrected Adam update in place. Refuses (NumericError, params and state
/// untouched) when any gradient is non-finite.
void adam_step(MlpParams& params, const Gradients& grads, AdamState& state, const AdamHyper& hyper);

/// Euclidean norm of the flattened final-layer weights.
double last_layer_norm(const MlpParams& params);

/// Flattened view helpers, used by gradient checks and soft updates.
std::vector<double> flatten(const MlpParams& params);
std::vector<double> flatten(const Gradients& grads);
void unflatten(std::span<const double> values, MlpParams& params);

bool same_shape(const MlpParams& a, const MlpParams& b);

}  // namespace peerlab::nn
