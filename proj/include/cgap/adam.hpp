#pragma once

#include <cmath>
#include <map>
#include <string>

#include "cgap/tensor.hpp"

namespace cgap {

using ParamMap = std::map<std::string, Tensor2>;

// Bias-corrected Adam. Moments are keyed by parameter name and shape-checked
// against their parameters on every step.
struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long long step = 0;
    ParamMap m;
    ParamMap v;

    AdamState() = default;
    AdamState(const ParamMap& params, double lr) : learning_rate(lr) {
        for (const auto& [name, t] : params) {
            m[name] = Tensor2(t.rows, t.cols);
            v[name] = Tensor2(t.rows, t.cols);
        }
    }
};

inline void adam_step(ParamMap& params, const ParamMap& grads, AdamState& state) {
    ++state.step;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (auto& [name, p] : params) {
        auto git = grads.find(name);
        if (git == grads.end()) throw error("adam_step: missing gradient for '" + name + "'");
        const Tensor2& g = git->second;
        Tensor2& mt = state.m.at(name);
        Tensor2& vt = state.v.at(name);
        if (!g.same_shape(p) || !mt.same_shape(p))
            throw error("adam_step: shape mismatch for '" + name + "'");
        for (size_t i = 0; i < p.data.size(); ++i) {
            mt.data[i] = state.beta1 * mt.data[i] + (1.0 - state.beta1) * g.data[i];
            vt.data[i] = state.beta2 * vt.data[i] + (1.0 - state.beta2) * g.data[i] * g.data[i];
            double mhat = mt.data[i] / bc1;
            double vhat = vt.data[i] / bc2;
            p.data[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

}  // namespace cgap
