#include "peerlab/tensor_nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "peerlab/errors.hpp"
#include "peerlab/rng.hpp"

namespace peerlab::nn {
namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

void check_trace(const MlpParams& params, const ForwardTrace& trace) {
  if (trace.pre.size() != params.layers.size() || trace.post.size() != params.layers.size()) {
    throw ShapeError("trace has " + std::to_string(trace.pre.size()) + " layers, network has " +
                     std::to_string(params.layers.size()));
  }
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    if (trace.pre[k].rows() != params.layers[k].output_width() ||
        trace.pre[k].cols() != trace.batch_size()) {
      throw ShapeError("trace layer " + std::to_string(k) + " does not match network");
    }
  }
}

Gradients backward_impl(const MlpParams& params, const ForwardTrace& trace, const Matrix& output_grad,
                        const Matrix* representation_grad) {
  check_trace(params, trace);
  const auto n = params.layers.size();
  if (output_grad.rows() != params.output_width() || output_grad.cols() != trace.batch_size()) {
    throw ShapeError("output_grad is " + dims(output_grad.rows(), output_grad.cols()) + ", expected " +
                     dims(params.output_width(), trace.batch_size()));
  }
  if (representation_grad != nullptr &&
      (representation_grad->rows() != params.representation_width() ||
       representation_grad->cols() != trace.batch_size())) {
    throw ShapeError("representation_grad is " +
                     dims(representation_grad->rows(), representation_grad->cols()) + ", expected " +
                     dims(params.representation_width(), trace.batch_size()));
  }

  Gradients grads;
  grads.layers.resize(n);
  Matrix delta = output_grad;  // d/d(pre-activation) of the last layer (identity)
  for (std::size_t k = n; k-- > 0;) {
    const LayerParams& layer = params.layers[k];
    const Matrix& layer_in = k == 0 ? trace.input : trace.post[k - 1];
    LayerParams& g = grads.layers[k];
    g.weights.noalias() = delta * layer_in.transpose();
    if (layer.bias) g.bias = delta.rowwise().sum();

    Matrix upstream = layer.weights.transpose() * delta;  // d/d(layer_in)
    if (k + 1 == n && representation_grad != nullptr) upstream += *representation_grad;
    if (k == 0) {
      grads.input = std::move(upstream);
    } else {
      const Matrix& z = trace.pre[k - 1];
      delta = (z.array() > 0.0).select(upstream, 0.0);
    }
  }
  return grads;
}

std::vector<LayerParams> zeros_like(const MlpParams& params) {
  std::vector<LayerParams> out;
  out.reserve(params.layers.size());
  for (const auto& layer : params.layers) {
    LayerParams z;
    z.weights = Matrix::Zero(layer.weights.rows(), layer.weights.cols());
    if (layer.bias) z.bias = Vector::Zero(layer.bias->size());
    out.push_back(std::move(z));
  }
  return out;
}

void append(std::vector<double>& out, const std::vector<LayerParams>& layers) {
  for (const auto& layer : layers) {
    out.insert(out.end(), layer.weights.data(), layer.weights.data() + layer.weights.size());
    if (layer.bias) out.insert(out.end(), layer.bias->data(), layer.bias->data() + layer.bias->size());
  }
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers) {
    count += static_cast<std::size_t>(layer.weights.size());
    if (layer.bias) count += static_cast<std::size_t>(layer.bias->size());
  }
  return count;
}

void MlpParams::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& layer = layers[k];
    if (layer.bias && layer.bias->size() != layer.output_width()) {
      throw ShapeError("layer " + std::to_string(k) + " bias length " +
                       std::to_string(layer.bias->size()) + " != output width " +
                       std::to_string(layer.output_width()));
    }
    if (k > 0 && layers[k - 1].output_width() != layer.input_width()) {
      throw ShapeError("layer " + std::to_string(k - 1) + " output width " +
                       std::to_string(layers[k - 1].output_width()) + " != layer " + std::to_string(k) +
                       " input width " + std::to_string(layer.input_width()));
    }
    if (!layer.weights.allFinite() || (layer.bias && !layer.bias->allFinite())) {
      throw NumericError("layer " + std::to_string(k) + " has non-finite parameters");
    }
  }
}

bool Gradients::all_finite() const {
  for (const auto& layer : layers) {
    if (!layer.weights.allFinite()) return false;
    if (layer.bias && !layer.bias->allFinite()) return false;
  }
  return input.allFinite();
}

MlpParams init_mlp(std::span<const int> layer_sizes, std::uint64_t seed, bool final_bias) {
  if (layer_sizes.size() < 2) throw ConfigError("layer_sizes", "need at least an input and an output width");
  for (int w : layer_sizes) {
    if (w < 1) throw ConfigError("layer_sizes", "widths must be positive, got " + std::to_string(w));
  }
  Rng rng(seed);
  MlpParams params;
  const std::size_t n = layer_sizes.size() - 1;
  for (std::size_t k = 0; k < n; ++k) {
    const int fan_in = layer_sizes[k];
    const int fan_out = layer_sizes[k + 1];
    const bool last = k + 1 == n;
    const double bound = std::sqrt((last ? 3.0 : 6.0) / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    LayerParams layer;
    layer.weights.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = dist(rng);
    }
    if (!last || final_bias) layer.bias = Vector::Zero(fan_out);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ForwardTrace forward_batch(const MlpParams& params, const Matrix& inputs) {
  if (params.layers.empty()) throw ShapeError("network has no layers");
  if (inputs.rows() != params.input_width()) {
    throw ShapeError("input width " + std::to_string(inputs.rows()) + " != network input width " +
                     std::to_string(params.input_width()));
  }
  if (!inputs.allFinite()) throw NumericError("non-finite network input");

  ForwardTrace trace;
  trace.input = inputs;
  const auto n = params.layers.size();
  trace.pre.reserve(n);
  trace.post.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const LayerParams& layer = params.layers[k];
    const Matrix& in = k == 0 ? trace.input : trace.post.back();
    Matrix z = layer.weights * in;
    if (layer.bias) z.colwise() += *layer.bias;
    Matrix a = (k + 1 == n) ? z : relu(z);
    trace.pre.push_back(std::move(z));
    trace.post.push_back(std::move(a));
  }
  return trace;
}

ForwardResult forward(const MlpParams& params, const Vector& input) {
  ForwardResult result;
  result.trace = forward_batch(params, input);
  result.representation = result.trace.representation().col(0);
  result.output = result.trace.output().col(0);
  return result;
}

Gradients backward(const MlpParams& params, const ForwardTrace& trace, const Matrix& output_grad) {
  return backward_impl(params, trace, output_grad, nullptr);
}

Gradients backward(const MlpParams& params, const ForwardTrace& trace, const Matrix& output_grad,
                   const Matrix& representation_grad) {
  return backward_impl(params, trace, output_grad, &representation_grad);
}

Gradients zero_gradients(const MlpParams& params) {
  Gradients g;
  g.layers = zeros_like(params);
  g.input = Matrix::Zero(params.input_width(), 0);
  return g;
}

AdamState init_adam(const MlpParams& params) {
  AdamState state;
  state.first_moment = zeros_like(params);
  state.second_moment = zeros_like(params);
  return state;
}

void adam_step(MlpParams& params, const Gradients& grads, AdamState& state, const AdamHyper& hyper) {
  if (grads.layers.size() != params.layers.size() || state.first_moment.size() != params.layers.size()) {
    throw ShapeError("gradients/optimizer state do not match the network");
  }
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& p = params.layers[k];
    const auto& g = grads.layers[k];
    if (g.weights.rows() != p.weights.rows() || g.weights.cols() != p.weights.cols() ||
        g.bias.has_value() != p.bias.has_value() || (g.bias && g.bias->size() != p.bias->size())) {
      throw ShapeError("gradient layer " + std::to_string(k) + " does not match the network");
    }
    if (!g.weights.allFinite() || (g.bias && !g.bias->allFinite())) {
      throw NumericError("non-finite gradient in layer " + std::to_string(k) + "; Adam step refused");
    }
  }
  if (!(hyper.lr > 0.0)) throw DomainError("Adam learning rate must be positive");

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = hyper.beta1 * m + (1.0 - hyper.beta1) * grad;
    v = hyper.beta2 * v + (1.0 - hyper.beta2) * grad.cwiseAbs2();
    param.array() -= hyper.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + hyper.eps);
  };
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto& p = params.layers[k];
    const auto& g = grads.layers[k];
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    update(p.weights, g.weights, m.weights, v.weights);
    if (p.bias) update(*p.bias, *g.bias, *m.bias, *v.bias);
  }
}

double last_layer_norm(const MlpParams& params) {
  if (params.layers.empty()) throw ShapeError("network has no layers");
  return params.layers.back().weights.norm();
}

std::vector<double> flatten(const MlpParams& params) {
  std::vector<double> out;
  out.reserve(params.parameter_count());
  append(out, params.layers);
  return out;
}

std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> out;
  append(out, grads.layers);
  return out;
}

void unflatten(std::span<const double> values, MlpParams& params) {
  if (values.size() != params.parameter_count()) {
    throw ShapeError("flat parameter vector has " + std::to_string(values.size()) + " entries, network has " +
                     std::to_string(params.parameter_count()));
  }
  std::size_t pos = 0;
  for (auto& layer : params.layers) {
    std::copy_n(values.begin() + pos, layer.weights.size(), layer.weights.data());
    pos += static_cast<std::size_t>(layer.weights.size());
    if (layer.bias) {
      std::copy_n(values.begin() + pos, layer.bias->size(), layer.bias->data());
      pos += static_cast<std::size_t>(layer.bias->size());
    }
  }
}

bool same_shape(const MlpParams& a, const MlpParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    const auto& x = a.layers[k];
    const auto& y = b.layers[k];
    if (x.weights.rows() != y.weights.rows() || x.weights.cols() != y.weights.cols()) return false;
    if (x.bias.has_value() != y.bias.has_value()) return false;
  }
  return true;
}

}  // namespace peerlab::nn
