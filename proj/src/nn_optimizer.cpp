#include "fedtrial/nn.hpp"

#include <cmath>

#include "fedtrial/errors.hpp"

namespace fedtrial::nn {

OptimizerState OptimizerState::make(const OptimizerConfig& config, std::size_t param_count) {
    if (config.learning_rate < 0.0)
        throw ConfigError("optimizer: learning_rate must be non-negative");
    if (config.kind == OptKind::ADAM) {
        if (config.beta1 <= 0.0 || config.beta1 >= 1.0 || config.beta2 <= 0.0 || config.beta2 >= 1.0)
            throw ConfigError("optimizer: adam betas must lie in (0, 1)");
        if (config.epsilon <= 0.0)
            throw ConfigError("optimizer: adam epsilon must be positive");
    }
    OptimizerState state;
    state.config = config;
    if (config.kind == OptKind::ADAM) {
        state.m.assign(param_count, 0.0);
        state.v.assign(param_count, 0.0);
    }
    return state;
}

void optimizer_step(ModelParameters& params, std::span<const double> grads, OptimizerState& state) {
    const std::size_t n = params.values.size();
    if (grads.size() != n)
        throw ShapeError("optimizer_step: gradient length " + std::to_string(grads.size()) +
                         " does not match parameter count " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(grads[i]))
            throw NumericError("optimizer_step: non-finite gradient at index " + std::to_string(i));

    const OptimizerConfig& c = state.config;
    state.step_count += 1;
    if (c.kind == OptKind::SGD) {
        for (std::size_t i = 0; i < n; ++i)
            params.values[i] -= c.learning_rate * grads[i];
    } else {
        if (state.m.size() != n || state.v.size() != n)
            throw ShapeError("optimizer_step: adam moments do not match parameter count");
        const auto t = static_cast<double>(state.step_count);
        const double bc1 = 1.0 - std::pow(c.beta1, t);
        const double bc2 = 1.0 - std::pow(c.beta2, t);
        for (std::size_t i = 0; i < n; ++i) {
            const double g = grads[i];
            state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
            state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
            const double mhat = state.m[i] / bc1;
            const double vhat = state.v[i] / bc2;
            params.values[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(params.values[i]))
            throw NumericError("optimizer_step: non-finite parameter at index " + std::to_string(i));
}

}  // namespace fedtrial::nn
