#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "symap/error.hpp"
#include "symap/rng.hpp"

namespace symap {

enum class Activation { tanh_fn, identity };

inline const char* to_string(Activation a) {
  return a == Activation::tanh_fn ? "tanh" : "identity";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh_fn;
  if (s == "identity") return Activation::identity;
  throw ValidationError("unknown activation: '" + s + "'");
}

struct LayerSpec {
  int inputs = 0;
  int outputs = 0;
  Activation activation = Activation::tanh_fn;
};

struct Layer {
  Eigen::MatrixXd weights;  // outputs x inputs
  Eigen::VectorXd biases;   // outputs
  Activation activation = Activation::tanh_fn;
};

struct NetworkParams {
  std::vector<Layer> layers;

  int input_width() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols());
  }
  int output_width() const {
    return layers.empty() ? 0 : static_cast<int>(layers.back().weights.rows());
  }

  void validate() const {
    detail::require(!layers.empty(), "network has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const Layer& l = layers[i];
      detail::require(l.weights.rows() > 0 && l.weights.cols() > 0,
                      "network layer has an empty weight matrix");
      detail::require(l.biases.size() == l.weights.rows(),
                      "network bias width does not match its layer");
      if (i > 0)
        detail::require(l.weights.cols() == layers[i - 1].weights.rows(),
                        "consecutive network layers do not chain");
      detail::require(l.weights.allFinite() && l.biases.allFinite(),
                      "network parameters must be finite");
    }
  }
};

// Glorot-uniform weights (+-sqrt(6 / (fan_in + fan_out))), zero biases.
// Weights are drawn row-major so the artifact is reproducible from the seed.
inline NetworkParams init_network(const std::vector<LayerSpec>& specs,
                                  std::uint64_t seed) {
  detail::require(!specs.empty(), "network needs at least one layer");
  Rng rng(seed);
  NetworkParams net;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& spec = specs[i];
    detail::require(spec.inputs > 0 && spec.outputs > 0,
                    "layer widths must be positive");
    if (i > 0)
      detail::require(spec.inputs == specs[i - 1].outputs,
                      "consecutive layer specs do not chain");
    Layer layer;
    layer.activation = spec.activation;
    layer.weights.resize(spec.outputs, spec.inputs);
    const double limit = std::sqrt(6.0 / (spec.inputs + spec.outputs));
    for (int r = 0; r < spec.outputs; ++r)
      for (int c = 0; c < spec.inputs; ++c)
        layer.weights(r, c) = rng.uniform(-limit, limit);
    layer.biases = Eigen::VectorXd::Zero(spec.outputs);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

// Post-activation output of every layer for one batch; required by backward.
struct ForwardCache {
  Eigen::MatrixXd input;                 // inputs x batch
  std::vector<Eigen::MatrixXd> outputs;  // per layer, outputs x batch
};

// Columns are samples.  Pass a cache to record what backward() needs.
inline Eigen::MatrixXd forward(const NetworkParams& net,
                               const Eigen::MatrixXd& batch,
                               ForwardCache* cache = nullptr) {
  detail::require(batch.rows() == net.input_width(),
                  "batch width does not match network input");
  if (cache) {
    cache->input = batch;
    cache->outputs.clear();
    cache->outputs.reserve(net.layers.size());
  }
  Eigen::MatrixXd current = batch;
  for (const Layer& layer : net.layers) {
    Eigen::MatrixXd pre = layer.weights * current;
    pre.colwise() += layer.biases;
    current = layer.activation == Activation::tanh_fn
                  ? pre.array().tanh().matrix()
                  : pre;
    if (cache) cache->outputs.push_back(current);
  }
  return current;
}

// Mean absolute deviation over all entries, with its subgradient
// (sign convention: exactly-zero residuals contribute zero).
inline std::pair<double, Eigen::MatrixXd> l1_loss_and_grad(
    const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target) {
  detail::require(predicted.rows() == target.rows() &&
                      predicted.cols() == target.cols(),
                  "loss operands must have equal shape");
  const double count = static_cast<double>(predicted.size());
  const Eigen::ArrayXXd diff = (predicted - target).array();
  const double loss = diff.abs().sum() / count;
  const Eigen::MatrixXd grad =
      (diff.sign() / count).matrix();
  return {loss, grad};
}

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Gradients zeros_like(const NetworkParams& net) {
    Gradients g;
    for (const Layer& l : net.layers) {
      g.weights.emplace_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
      g.biases.emplace_back(Eigen::VectorXd::Zero(l.biases.size()));
    }
    return g;
  }

  void accumulate(const Gradients& other) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      weights[i] += other.weights[i];
      biases[i] += other.biases[i];
    }
  }
};

// Reverse pass for the batch recorded in `cache`.  `output_grad` is the loss
// gradient at the network output; the return value holds parameter gradients
// and, optionally, the loss gradient at the network input (needed when
// networks are chained).
inline Gradients backward(const NetworkParams& net, const ForwardCache& cache,
                          const Eigen::MatrixXd& output_grad,
                          Eigen::MatrixXd* input_grad = nullptr) {
  detail::require(cache.outputs.size() == net.layers.size(),
                  "forward cache does not match the network");
  detail::require(cache.input.rows() == net.input_width(),
                  "forward cache does not match the network input");
  detail::require(output_grad.rows() == net.output_width() &&
                      output_grad.cols() == cache.input.cols(),
                  "output gradient shape does not match the cached batch");

  Gradients grads;
  grads.weights.resize(net.layers.size());
  grads.biases.resize(net.layers.size());

  Eigen::MatrixXd upstream = output_grad;
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    const Layer& layer = net.layers[i];
    const Eigen::MatrixXd& activated = cache.outputs[i];
    Eigen::MatrixXd pre_grad;
    if (layer.activation == Activation::tanh_fn)
      pre_grad = (upstream.array() * (1.0 - activated.array().square())).matrix();
    else
      pre_grad = upstream;
    const Eigen::MatrixXd& below = i == 0 ? cache.input : cache.outputs[i - 1];
    grads.weights[i] = pre_grad * below.transpose();
    grads.biases[i] = pre_grad.rowwise().sum();
    if (i > 0 || input_grad) upstream = layer.weights.transpose() * pre_grad;
  }
  if (input_grad) *input_grad = upstream;
  return grads;
}

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 200;
  std::uint64_t seed = 0;
  double latent_loss_weight = 1.0;  // weight of the shared-code penalty

  void validate() const {
    detail::require(learning_rate > 0.0, "learning rate must be positive");
    detail::require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
                    "adam decay rates must lie in [0, 1)");
    detail::require(epsilon > 0.0, "adam epsilon must be positive");
    detail::require(batch_size > 0, "batch size must be positive");
    detail::require(epochs > 0, "epoch count must be positive");
    detail::require(latent_loss_weight >= 0.0,
                    "latent loss weight must be nonnegative");
  }
};

struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long long step = 0;

  static AdamState zeros_like(const NetworkParams& net) {
    AdamState s;
    for (const Layer& l : net.layers) {
      s.m_w.emplace_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
      s.v_w.emplace_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
      s.m_b.emplace_back(Eigen::VectorXd::Zero(l.biases.size()));
      s.v_b.emplace_back(Eigen::VectorXd::Zero(l.biases.size()));
    }
    return s;
  }
};

inline void adam_step(NetworkParams& net, const Gradients& grads,
                      AdamState& state, const TrainConfig& config) {
  detail::require(state.m_w.size() == net.layers.size() &&
                      grads.weights.size() == net.layers.size(),
                  "adam state does not match the network");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double m_correction = 1.0 - std::pow(config.beta1, t);
  const double v_correction = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
      m = config.beta1 * m + (1.0 - config.beta1) * grad;
      v = (config.beta2 * v.array() + (1.0 - config.beta2) * grad.array().square()).matrix();
      const auto m_hat = m.array() / m_correction;
      const auto v_hat = v.array() / v_correction;
      param.array() -=
          config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    };
    update(net.layers[i].weights, state.m_w[i], state.v_w[i], grads.weights[i]);
    update(net.layers[i].biases, state.m_b[i], state.v_b[i], grads.biases[i]);
  }
}

}  // namespace symap
