#pragma once

// Dense multilayer perceptron: parameters, Glorot initialisation, forward pass
// and exact reverse-mode gradients.
//
// Samples are stored column-wise: a batch of B inputs is an (input_dim x B)
// matrix.  Weight matrices are (output_dim x input_dim), so one layer computes
//     pre  = W * post_prev + b
//     post = act(pre)

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ddqn/errors.hpp"
#include "ddqn/rng.hpp"

namespace ddqn::nn {

enum class Activation { Identity, ReLU, Tanh };

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

inline Activation activation_from_string(const std::string& name) {
    if (name == "identity" || name == "linear") return Activation::Identity;
    if (name == "relu") return Activation::ReLU;
    if (name == "tanh") return Activation::Tanh;
    throw ConfigError("unknown activation '" + name + "'");
}

struct LayerSpec {
    int input_dim = 1;
    int output_dim = 1;
    Activation activation = Activation::Identity;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

using Architecture = std::vector<LayerSpec>;

// Throws ConfigError unless the layer list is non-empty, every dimension is
// positive and consecutive layers chain.
inline void validate(const Architecture& arch) {
    if (arch.empty()) throw ConfigError("architecture has no layers");
    for (std::size_t k = 0; k < arch.size(); ++k) {
        if (arch[k].input_dim < 1 || arch[k].output_dim < 1)
            throw ConfigError("layer " + std::to_string(k) + " has a non-positive dimension");
        if (k > 0 && arch[k - 1].output_dim != arch[k].input_dim)
            throw ConfigError("layer " + std::to_string(k - 1) + " output_dim " +
                              std::to_string(arch[k - 1].output_dim) + " != layer " +
                              std::to_string(k) + " input_dim " + std::to_string(arch[k].input_dim));
    }
}

// Q-network layout: `hidden` layers of the given widths with `act`, followed
// by an Identity output layer with one unit per action.  An empty `hidden`
// gives the linear architecture.
inline Architecture q_network(int obs_dim, int n_actions, const std::vector<int>& hidden,
                              Activation act) {
    Architecture arch;
    int in = obs_dim;
    for (int width : hidden) {
        arch.push_back({in, width, act});
        in = width;
    }
    arch.push_back({in, n_actions, Activation::Identity});
    validate(arch);
    return arch;
}

struct Layer {
    LayerSpec spec;
    Eigen::MatrixXd weight;  // output_dim x input_dim
    Eigen::VectorXd bias;    // output_dim

    friend bool operator==(const Layer& a, const Layer& b) {
        return a.spec == b.spec && a.weight.rows() == b.weight.rows() &&
               a.weight.cols() == b.weight.cols() && a.bias.size() == b.bias.size() &&
               a.weight == b.weight && a.bias == b.bias;
    }
};

struct MlpParams {
    std::vector<Layer> layers;

    int input_dim() const { return layers.front().spec.input_dim; }
    int output_dim() const { return layers.back().spec.output_dim; }

    Architecture architecture() const {
        Architecture arch;
        arch.reserve(layers.size());
        for (const auto& l : layers) arch.push_back(l.spec);
        return arch;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }

    bool all_finite() const {
        for (const auto& l : layers)
            if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
        return true;
    }

    bool same_shape(const MlpParams& other) const {
        if (layers.size() != other.layers.size()) return false;
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& a = layers[k];
            const auto& b = other.layers[k];
            if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
                a.bias.size() != b.bias.size())
                return false;
        }
        return true;
    }

    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// All-zero parameters with the given layout.
inline MlpParams zeros(const Architecture& arch) {
    validate(arch);
    MlpParams p;
    p.layers.reserve(arch.size());
    for (const auto& s : arch)
        p.layers.push_back({s, Eigen::MatrixXd::Zero(s.output_dim, s.input_dim),
                            Eigen::VectorXd::Zero(s.output_dim)});
    return p;
}

inline MlpParams zeros_like(const MlpParams& p) { return zeros(p.architecture()); }

// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
inline double glorot_limit(int fan_in, int fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// Weights ~ U[-L, L) with L = glorot_limit, biases exactly zero.  Draw order
// is layer by layer, each weight matrix in row-major order.
inline MlpParams glorot_init(const Architecture& arch, Rng& rng) {
    MlpParams p = zeros(arch);
    for (auto& layer : p.layers) {
        const double limit = glorot_limit(layer.spec.input_dim, layer.spec.output_dim);
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                layer.weight(r, c) = rng.uniform(-limit, limit);
    }
    return p;
}

// Pre- and post-activations from one forward pass.  post[0] is the input,
// pre[k] / post[k + 1] belong to layer k.
struct GradCache {
    std::vector<Eigen::MatrixXd> pre;
    std::vector<Eigen::MatrixXd> post;
};

namespace detail {

inline void apply_activation(Activation act, const Eigen::MatrixXd& pre, Eigen::MatrixXd& out) {
    switch (act) {
        case Activation::Identity: out = pre; break;
        case Activation::ReLU: out = pre.cwiseMax(0.0); break;
        case Activation::Tanh: out = pre.array().tanh().matrix(); break;
    }
}

// d post / d pre, multiplied elementwise into `grad` in place.
inline void multiply_activation_derivative(Activation act, const Eigen::MatrixXd& pre,
                                           const Eigen::MatrixXd& post, Eigen::MatrixXd& grad) {
    switch (act) {
        case Activation::Identity: break;
        case Activation::ReLU:
            // Subgradient at exactly zero is zero.
            grad = (pre.array() > 0.0).select(grad, 0.0);
            break;
        case Activation::Tanh: grad.array() *= 1.0 - post.array().square(); break;
    }
}

inline void check_input(const MlpParams& params, Eigen::Index rows) {
    if (params.layers.empty()) throw ShapeError("forward: network has no layers");
    if (rows != params.input_dim())
        throw ShapeError("forward: input has " + std::to_string(rows) + " components, network expects " +
                         std::to_string(params.input_dim()));
}

}  // namespace detail

// Batched forward pass over the columns of `inputs`.  When `cache` is given
// it receives everything `backward` needs.
inline Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& inputs,
                                     GradCache* cache = nullptr) {
    detail::check_input(params, inputs.rows());
    if (cache) {
        cache->pre.resize(params.layers.size());
        cache->post.resize(params.layers.size() + 1);
        cache->post[0] = inputs;
        for (std::size_t k = 0; k < params.layers.size(); ++k) {
            const auto& layer = params.layers[k];
            cache->pre[k].noalias() = layer.weight * cache->post[k];
            cache->pre[k].colwise() += layer.bias;
            detail::apply_activation(layer.spec.activation, cache->pre[k], cache->post[k + 1]);
        }
        return cache->post.back();
    }
    Eigen::MatrixXd current = inputs;
    Eigen::MatrixXd pre;
    for (const auto& layer : params.layers) {
        pre.noalias() = layer.weight * current;
        pre.colwise() += layer.bias;
        detail::apply_activation(layer.spec.activation, pre, current);
    }
    return current;
}

struct ForwardResult {
    Eigen::VectorXd output;
    GradCache cache;
};

inline ForwardResult forward(const MlpParams& params, const Eigen::VectorXd& input) {
    ForwardResult r;
    r.output = forward_batch(params, input, &r.cache);
    return r;
}

// Forward pass without a cache.
inline Eigen::VectorXd predict(const MlpParams& params, const Eigen::VectorXd& input) {
    return forward_batch(params, input);
}

// Gradient of sum_j output_grad(:, j) . output(:, j) with respect to every
// weight and bias, given the cache of the matching forward call.
inline MlpParams backward(const MlpParams& params, const GradCache& cache,
                          const Eigen::MatrixXd& output_grad) {
    const std::size_t n_layers = params.layers.size();
    if (n_layers == 0 || cache.pre.size() != n_layers || cache.post.size() != n_layers + 1)
        throw ShapeError("backward: cache does not match the network depth");
    for (std::size_t k = 0; k < n_layers; ++k) {
        const auto& s = params.layers[k].spec;
        if (cache.pre[k].rows() != s.output_dim || cache.post[k].rows() != s.input_dim)
            throw ShapeError("backward: cache shape mismatch at layer " + std::to_string(k));
    }
    if (output_grad.rows() != params.output_dim() || output_grad.cols() != cache.pre.back().cols())
        throw ShapeError("backward: output_grad shape does not match the forward output");

    MlpParams grad;
    grad.layers.resize(n_layers);
    Eigen::MatrixXd delta = output_grad;
    for (std::size_t k = n_layers; k-- > 0;) {
        const auto& layer = params.layers[k];
        detail::multiply_activation_derivative(layer.spec.activation, cache.pre[k], cache.post[k + 1],
                                               delta);
        auto& g = grad.layers[k];
        g.spec = layer.spec;
        g.weight.noalias() = delta * cache.post[k].transpose();
        g.bias = delta.rowwise().sum();
        if (k > 0) {
            Eigen::MatrixXd upstream;
            upstream.noalias() = layer.weight.transpose() * delta;
            delta = std::move(upstream);
        }
    }
    return grad;
}

// Index of the largest entry; ties go to the lowest index.
inline int argmax(const Eigen::Ref<const Eigen::VectorXd>& values) {
    int best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = static_cast<int>(i);
    return best;
}

}  // namespace ddqn::nn
