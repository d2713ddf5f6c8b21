#pragma once

#include <functional>

#include "sonovis/ad/graph.hpp"

namespace sonovis::ad {

// Central-difference verification of the analytic gradient. `build_loss`
// must rebuild the scalar loss from the current values of `nodes` on every
// call (and must be deterministic: stochastic layers re-seed internally).
// Returns max over coordinates of |analytic - numeric| /
// max(1e-8, |analytic| + |numeric|). Meant for S = double.
template <class S>
double grad_check(const std::function<Var<S>()>& build_loss, std::vector<NodePtr<S>> nodes,
                  double eps = 1e-4) {
    for (auto& n : nodes) n->clear_grad();
    Var<S> loss = build_loss();
    backward(loss);
    std::vector<TensorT<S>> analytic;
    analytic.reserve(nodes.size());
    for (auto& n : nodes) {
        require(n->requires_grad, ErrorCode::Runtime, "grad_check: node does not require grad");
        analytic.push_back(n->grad_ready ? n->grad : TensorT<S>::zeros(n->value.shape));
    }

    double worst = 0.0;
    for (size_t k = 0; k < nodes.size(); ++k) {
        Node<S>& n = *nodes[k];
        for (int64_t j = 0; j < n.value.numel(); ++j) {
            const S saved = n.value[j];
            n.value[j] = saved + static_cast<S>(eps);
            const double f_plus = static_cast<double>(build_loss().value()[0]);
            n.value[j] = saved - static_cast<S>(eps);
            const double f_minus = static_cast<double>(build_loss().value()[0]);
            n.value[j] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            const double a = static_cast<double>(analytic[k][j]);
            const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    for (auto& n : nodes) n->clear_grad();
    return worst;
}

}  // namespace sonovis::ad
