#pragma once

#include <cmath>
#include <cstdint>

#include "ddqn/errors.hpp"
#include "ddqn/nn/mlp.hpp"

namespace ddqn::nn {

struct AdamConfig {
    double alpha = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

// First and second moment estimates, shaped like the parameters they track.
struct AdamState {
    MlpParams m;
    MlpParams v;
    std::uint64_t t = 0;

    friend bool operator==(const AdamState&, const AdamState&) = default;
};

inline AdamState adam_init(const MlpParams& params) {
    return {zeros_like(params), zeros_like(params), 0};
}

// One bias-corrected Adam update of `params` in place.  Throws TrainingError
// (leaving params and state untouched) if any gradient entry is non-finite.
inline void adam_step(MlpParams& params, const MlpParams& grad, AdamState& state,
                      const AdamConfig& cfg) {
    if (!params.same_shape(grad) || !params.same_shape(state.m) || !params.same_shape(state.v))
        throw ShapeError("adam_step: parameter, gradient and moment shapes differ");
    if (!grad.all_finite()) throw TrainingError("adam_step: non-finite gradient entry");

    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);

    auto update = [&](auto param, auto g, auto m, auto v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.square();
        param -= cfg.alpha * (m / correction1) / ((v / correction2).sqrt() + cfg.eps);
    };
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        update(params.layers[k].weight.array(), grad.layers[k].weight.array(),
               state.m.layers[k].weight.array(), state.v.layers[k].weight.array());
        update(params.layers[k].bias.array(), grad.layers[k].bias.array(),
               state.m.layers[k].bias.array(), state.v.layers[k].bias.array());
    }
}

inline void adam_step(MlpParams& params, const MlpParams& grad, AdamState& state, double alpha,
                      double beta1, double beta2, double eps) {
    adam_step(params, grad, state, AdamConfig{alpha, beta1, beta2, eps});
}

}  // namespace ddqn::nn
