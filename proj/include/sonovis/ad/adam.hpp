#pragma once

#include <cmath>

#include "sonovis/ad/graph.hpp"

namespace sonovis::ad {

// Classic Adam with bias correction. Moment buffers are kept in parameter
// order; `step` counts completed updates.
template <class S>
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t step = 0;
    std::vector<TensorT<S>> m, v;

    void init(const std::vector<NodePtr<S>>& params) {
        m.clear();
        v.clear();
        for (const auto& p : params) {
            m.push_back(TensorT<S>::zeros(p->value.shape));
            v.push_back(TensorT<S>::zeros(p->value.shape));
        }
    }
};

template <class S>
void adam_step(std::vector<NodePtr<S>>& params, AdamState<S>& state) {
    require(state.m.size() == params.size() && state.v.size() == params.size(),
            ErrorCode::Runtime, "adam_step: state not initialized for this parameter list");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        Node<S>& p = *params[i];
        require(p.value.shape == state.m[i].shape, ErrorCode::Runtime,
                "adam_step: moment/parameter shape mismatch");
        if (!p.grad_ready) p.ensure_grad();  // zero gradient: only the step counter moves
        TensorT<S>& m = state.m[i];
        TensorT<S>& v = state.v[i];
        for (int64_t j = 0; j < p.value.numel(); ++j) {
            const double g = p.grad[j];
            if (!std::isfinite(g)) fail(ErrorCode::Runtime, "adam_step: non-finite gradient");
            const double mj = state.beta1 * m[j] + (1.0 - state.beta1) * g;
            const double vj = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
            m[j] = static_cast<S>(mj);
            v[j] = static_cast<S>(vj);
            const double mhat = mj / bc1;
            const double vhat = vj / bc2;
            p.value[j] = static_cast<S>(p.value[j] - state.lr * mhat / (std::sqrt(vhat) + state.eps));
        }
    }
}

template <class S>
void zero_grads(std::vector<NodePtr<S>>& params) {
    for (auto& p : params) p->clear_grad();
}

}  // namespace sonovis::ad
