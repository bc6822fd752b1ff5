#pragma once

// Finite-difference check of `backward`.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ddqn/nn/mlp.hpp"
#include "ddqn/rng.hpp"

namespace ddqn::nn {

struct GradCheckResult {
    double max_relative_error = 0.0;
    double max_absolute_error = 0.0;
    std::size_t entries = 0;
};

// Relative error |a - b| / max(|a|, |b|, floor).  The floor keeps entries
// that are zero in both routes (dead ReLU units) from dividing by zero.
inline double relative_error(double a, double b, double floor = 1e-7) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

namespace detail {

// Objective value and the on/off pattern of every ReLU unit.
inline double objective_and_pattern(const MlpParams& params, const Eigen::VectorXd& input,
                                    const Eigen::VectorXd& output_grad, std::vector<bool>& pattern) {
    const auto fwd = forward(params, input);
    pattern.clear();
    for (std::size_t k = 0; k < params.layers.size(); ++k)
        if (params.layers[k].spec.activation == Activation::ReLU)
            for (Eigen::Index i = 0; i < fwd.cache.pre[k].size(); ++i) pattern.push_back(fwd.cache.pre[k](i, 0) > 0.0);
    return output_grad.dot(fwd.output);
}

}  // namespace detail

// Compares the analytic gradient of f(params) = output_grad . forward(params, input)
// with the fourth-order central difference
//   (8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h
// on every weight and bias.  A step that flips any ReLU unit is shrunk
// tenfold until the stencil stays on one linear piece.
inline GradCheckResult gradient_check(const MlpParams& params, const Eigen::VectorXd& input,
                                      const Eigen::VectorXd& output_grad, double h = 1e-3) {
    const auto fwd = forward(params, input);
    const MlpParams analytic = backward(params, fwd.cache, output_grad);
    std::vector<bool> base_pattern, pattern;
    (void)detail::objective_and_pattern(params, input, output_grad, base_pattern);

    MlpParams probe = params;
    GradCheckResult result;
    auto check = [&](double& slot, double analytic_value) {
        const double saved = slot;
        double numeric = 0.0;
        for (double step = h;; step /= 10) {
            bool same_piece = true;
            double f[4];
            const double offsets[4] = {step, -step, 2 * step, -2 * step};
            for (int i = 0; i < 4; ++i) {
                slot = saved + offsets[i];
                f[i] = detail::objective_and_pattern(probe, input, output_grad, pattern);
                same_piece = same_piece && pattern == base_pattern;
            }
            slot = saved;
            numeric = (8 * (f[0] - f[1]) - (f[2] - f[3])) / (12 * step);
            if (same_piece || step < 1e-9) break;
        }
        result.max_relative_error = std::max(result.max_relative_error, relative_error(analytic_value, numeric));
        result.max_absolute_error = std::max(result.max_absolute_error, std::abs(analytic_value - numeric));
        ++result.entries;
    };
    for (std::size_t k = 0; k < probe.layers.size(); ++k) {
        auto& layer = probe.layers[k];
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                check(layer.weight(r, c), analytic.layers[k].weight(r, c));
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) check(layer.bias[r], analytic.layers[k].bias[r]);
    }
    return result;
}

// Smallest |pre-activation| over all ReLU layers for this input; infinity
// when the network has none.
inline double min_relu_margin(const MlpParams& params, const Eigen::VectorXd& input) {
    const auto fwd = forward(params, input);
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < params.layers.size(); ++k)
        if (params.layers[k].spec.activation == Activation::ReLU)
            margin = std::min(margin, fwd.cache.pre[k].cwiseAbs().minCoeff());
    return margin;
}

// Random probe used by the gradient-check suite: Glorot weights, biases and
// input components drawn from U[-0.1, 0.1) and U[-1, 1), output_grad from
// U[-1, 1).  Inputs are redrawn until every ReLU pre-activation is at least
// `margin` away from zero so the finite difference never straddles a kink.
struct GradProbe {
    MlpParams params;
    Eigen::VectorXd input;
    Eigen::VectorXd output_grad;
};

inline GradProbe random_probe(const Architecture& arch, Rng& rng, double margin = 1e-3) {
    GradProbe probe{glorot_init(arch, rng), {}, {}};
    for (auto& l : probe.params.layers)
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = rng.uniform(-0.1, 0.1);
    probe.input.resize(arch.front().input_dim);
    do {
        for (Eigen::Index i = 0; i < probe.input.size(); ++i) probe.input[i] = rng.uniform(-1.0, 1.0);
    } while (min_relu_margin(probe.params, probe.input) < margin);
    probe.output_grad.resize(arch.back().output_dim);
    for (Eigen::Index i = 0; i < probe.output_grad.size(); ++i) probe.output_grad[i] = rng.uniform(-1.0, 1.0);
    return probe;
}

}  // namespace ddqn::nn
