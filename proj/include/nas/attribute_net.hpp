#pragma once

// Attribute network: a 2M-layer fully connected encoder/decoder. Layers
// 1..M encode x into the code V^(M) (width d), layers M+1..2M decode it
// back to a reconstruction of x. Hidden layers use ReLU; the code layer and
// the output layer use the logistic sigmoid.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "nas/error.hpp"
#include "nas/numeric.hpp"

namespace nas {

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::Relu;
};

struct AttributeNetOptions {
  std::size_t depth = 1;                  // M
  std::size_t code_width = 15;            // d_M
  std::vector<std::size_t> hidden_widths; // widths of encoder layers 1..M-1
  Activation hidden_activation = Activation::Relu;
  Activation code_activation = Activation::Sigmoid;
  Activation output_activation = Activation::Sigmoid;
};

struct AttributeNetParams {
  std::vector<DenseLayer> layers;  // 2M layers, encoder first

  std::size_t depth() const { return layers.size() / 2; }
  std::size_t input_width() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols()); }
  std::size_t code_width() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers[depth() - 1].weight.rows()); }
};

/// Gradient (or any other per-parameter quantity) shaped like AttributeNetParams.
struct AttributeNetGrads {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  static AttributeNetGrads zeros_like(const AttributeNetParams& p) {
    AttributeNetGrads g;
    for (const auto& l : p.layers) {
      g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      g.bias.push_back(Vector::Zero(l.bias.size()));
    }
    return g;
  }

  AttributeNetGrads& operator+=(const AttributeNetGrads& o) {
    for (std::size_t i = 0; i < weight.size(); ++i) {
      weight[i] += o.weight[i];
      bias[i] += o.bias[i];
    }
    return *this;
  }

  AttributeNetGrads& operator*=(double s) {
    for (std::size_t i = 0; i < weight.size(); ++i) {
      weight[i] *= s;
      bias[i] *= s;
    }
    return *this;
  }

  double squared_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) s += weight[i].squaredNorm() + bias[i].squaredNorm();
    return s;
  }
};

struct AttributeForwardTrace {
  Vector input;
  std::vector<Vector> pre;  // pre-activations per layer
  std::vector<Vector> act;  // V^(1..2M)
};

struct AttributeForward {
  Vector code;
  Vector reconstruction;
  AttributeForwardTrace trace;
};

/// Layer widths u -> h_1 .. h_{M-1} -> d -> h_{M-1} .. h_1 -> u.
inline std::vector<std::size_t> attribute_layer_widths(std::size_t input_width, const AttributeNetOptions& opt) {
  if (opt.depth < 1) throw ConfigError("attribute network depth M must be >= 1");
  if (opt.code_width < 1) throw ConfigError("attribute code width must be >= 1");
  if (input_width < 1) throw ConfigError("attribute input width must be >= 1");
  std::vector<std::size_t> hidden = opt.hidden_widths;
  if (hidden.empty() && opt.depth > 1) {
    // Linear interpolation between u and d.
    for (std::size_t i = 1; i < opt.depth; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(opt.depth);
      hidden.push_back(std::max<std::size_t>(
          1, static_cast<std::size_t>(static_cast<double>(input_width) +
                                      frac * (static_cast<double>(opt.code_width) - static_cast<double>(input_width)) + 0.5)));
    }
  }
  if (hidden.size() != opt.depth - 1) throw ConfigError("attribute network needs M-1 hidden widths");
  std::vector<std::size_t> widths{input_width};
  for (auto w : hidden) widths.push_back(w);
  widths.push_back(opt.code_width);
  for (auto it = hidden.rbegin(); it != hidden.rend(); ++it) widths.push_back(*it);
  widths.push_back(input_width);
  return widths;
}

/// Glorot-uniform weights, zero biases.
inline AttributeNetParams make_attribute_net(std::size_t input_width, const AttributeNetOptions& opt, RandomSource& rng) {
  const auto widths = attribute_layer_widths(input_width, opt);
  AttributeNetParams p;
  const std::size_t m = opt.depth;
  for (std::size_t i = 1; i < widths.size(); ++i) {
    DenseLayer layer;
    layer.weight = glorot_uniform(widths[i], widths[i - 1], rng);
    layer.bias = Vector::Zero(static_cast<Eigen::Index>(widths[i]));
    if (i == m) {
      layer.activation = opt.code_activation;
    } else if (i == 2 * m) {
      layer.activation = opt.output_activation;
    } else {
      layer.activation = opt.hidden_activation;
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

inline AttributeForward attr_forward(const AttributeNetParams& params, const Vector& x) {
  if (params.layers.empty()) throw InputDomainError("attr_forward: empty network");
  if (static_cast<std::size_t>(x.size()) != params.input_width())
    throw InputDomainError("attr_forward: input has dimension " + std::to_string(x.size()) + ", network expects " +
                           std::to_string(params.input_width()));
  AttributeForward out;
  out.trace.input = x;
  const Vector* in = &x;
  for (const auto& layer : params.layers) {
    out.trace.pre.push_back(layer.weight * *in + layer.bias);
    out.trace.act.push_back(activate(layer.activation, out.trace.pre.back()));
    in = &out.trace.act.back();
  }
  out.code = out.trace.act[params.depth() - 1];
  out.reconstruction = out.trace.act.back();
  return out;
}

/// Encoder half only: returns V^(M).
inline Vector attr_encode(const AttributeNetParams& params, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != params.input_width())
    throw InputDomainError("attr_encode: input dimension mismatch");
  Vector v = x;
  for (std::size_t i = 0; i < params.depth(); ++i) {
    const auto& layer = params.layers[i];
    v = activate(layer.activation, layer.weight * v + layer.bias);
  }
  return v;
}

/// Squared reconstruction error ||x - x_hat||^2.
inline double attr_loss(const Vector& x, const Vector& reconstruction) {
  if (x.size() != reconstruction.size()) throw InputDomainError("attr_loss: dimension mismatch");
  return (x - reconstruction).squaredNorm();
}

namespace detail {

inline void check_trace(const AttributeNetParams& params, const AttributeForwardTrace& trace) {
  if (trace.act.size() != params.layers.size() || trace.pre.size() != params.layers.size())
    throw InternalError("attribute trace layer count does not match the network");
  if (static_cast<std::size_t>(trace.input.size()) != params.input_width())
    throw InternalError("attribute trace input width does not match the network");
  for (std::size_t i = 0; i < params.layers.size(); ++i)
    if (trace.act[i].size() != params.layers[i].weight.rows())
      throw InternalError("attribute trace layer " + std::to_string(i + 1) + " width drifted");
}

/// Backpropagates `upstream` (gradient w.r.t. the activation of layer
/// `top`) down to layer 0, accumulating into `grads`.
inline void attr_backprop(const AttributeNetParams& params, const AttributeForwardTrace& trace, std::size_t top,
                          Vector upstream, AttributeNetGrads& grads) {
  for (std::size_t i = top + 1; i-- > 0;) {
    const auto& layer = params.layers[i];
    const Vector delta =
        (upstream.array() * activation_derivative(layer.activation, trace.pre[i], trace.act[i]).array()).matrix();
    const Vector& input = i == 0 ? trace.input : trace.act[i - 1];
    grads.weight[i].noalias() += delta * input.transpose();
    grads.bias[i] += delta;
    if (i > 0) upstream = layer.weight.transpose() * delta;
  }
}

}  // namespace detail

/// Gradient of ||x - x_hat||^2 with respect to every weight and bias.
inline AttributeNetGrads attr_backward(const AttributeNetParams& params, const AttributeForwardTrace& trace,
                                       const Vector& x) {
  detail::check_trace(params, trace);
  if (x.size() != trace.input.size()) throw InternalError("attr_backward: target dimension mismatch");
  AttributeNetGrads grads = AttributeNetGrads::zeros_like(params);
  const Vector upstream = 2.0 * (trace.act.back() - x);
  detail::attr_backprop(params, trace, params.layers.size() - 1, upstream, grads);
  return grads;
}

/// Chains a gradient arriving at the code V^(M) into the encoder layers.
/// Decoder entries of the result stay zero.
inline void attr_backward_code(const AttributeNetParams& params, const AttributeForwardTrace& trace,
                               const Vector& grad_code, AttributeNetGrads& grads) {
  detail::check_trace(params, trace);
  if (static_cast<std::size_t>(grad_code.size()) != params.code_width())
    throw InternalError("attr_backward_code: code gradient dimension mismatch");
  detail::attr_backprop(params, trace, params.depth() - 1, grad_code, grads);
}

inline void apply_update(AttributeNetParams& params, const AttributeNetGrads& grads, double lr,
                         std::size_t first_layer = 0, std::size_t end_layer = static_cast<std::size_t>(-1)) {
  end_layer = std::min(end_layer, params.layers.size());
  for (std::size_t i = first_layer; i < end_layer; ++i) {
    params.layers[i].weight.noalias() -= lr * grads.weight[i];
    params.layers[i].bias.noalias() -= lr * grads.bias[i];
  }
}

}  // namespace nas
