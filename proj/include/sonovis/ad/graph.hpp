#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "sonovis/core/tensor.hpp"

namespace sonovis::ad {

enum class Mode { Train, Eval };

template <class S>
struct Node;

template <class S>
using NodePtr = std::shared_ptr<Node<S>>;

// One tape entry. `backward_fn` pulls this node's gradient into its parents;
// reverse-topological dispatch guarantees the gradient here is complete by
// the time it runs.
template <class S>
struct Node {
    TensorT<S> value;
    TensorT<S> grad;
    bool requires_grad = false;
    bool grad_ready = false;
    const char* op = "leaf";
    std::vector<NodePtr<S>> parents;
    std::function<void(Node<S>&)> backward_fn;

    TensorT<S>& ensure_grad() {
        if (!grad_ready) {
            grad = TensorT<S>::zeros(value.shape);
            grad_ready = true;
        }
        return grad;
    }
    void clear_grad() {
        grad_ready = false;
        grad = TensorT<S>();
    }
};

// Value-semantics handle to a tape node.
template <class S>
class Var {
public:
    Var() = default;
    explicit Var(NodePtr<S> node) : node_(std::move(node)) {}

    static Var leaf(TensorT<S> value, bool requires_grad = false) {
        auto n = std::make_shared<Node<S>>();
        n->value = std::move(value);
        n->requires_grad = requires_grad;
        return Var(std::move(n));
    }

    bool defined() const { return node_ != nullptr; }
    const TensorT<S>& value() const { return node_->value; }
    TensorT<S>& value() { return node_->value; }
    const TensorT<S>& grad() const { return node_->grad; }
    bool requires_grad() const { return node_->requires_grad; }
    const NodePtr<S>& node() const { return node_; }
    const std::vector<int>& shape() const { return node_->value.shape; }

private:
    NodePtr<S> node_;
};

template <class S>
Var<S> make_op(const char* op, TensorT<S> value, std::vector<NodePtr<S>> parents,
               std::function<void(Node<S>&)> backward_fn) {
    check_finite(value, op);
    auto n = std::make_shared<Node<S>>();
    n->value = std::move(value);
    n->op = op;
    for (auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(backward_fn);
    }
    return Var<S>(std::move(n));
}

// Reverse-mode sweep from a scalar loss.
template <class S>
void backward(const Var<S>& loss) {
    require(loss.defined(), ErrorCode::Runtime, "backward: undefined loss");
    require(loss.value().numel() == 1, ErrorCode::Runtime, "backward: loss must be scalar");
    require(loss.node()->requires_grad, ErrorCode::Runtime,
            "backward: loss does not require grad (no forward with grad tracking)");

    // Iterative topological order (inputs before consumers).
    std::vector<Node<S>*> topo;
    std::unordered_set<Node<S>*> visited;
    std::vector<std::pair<Node<S>*, size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    visited.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<S>* parent = node->parents[next].get();
            ++next;
            if (parent->requires_grad && !visited.count(parent)) {
                visited.insert(parent);
                stack.emplace_back(parent, 0);
            }
        } else {
            topo.push_back(node);
            stack.pop_back();
        }
    }

    loss.node()->ensure_grad().data[0] = S(1);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        Node<S>* n = *it;
        if (n->backward_fn && n->grad_ready) n->backward_fn(*n);
    }
}

// ---- elementwise and reduction ops ----

template <class S>
void check_same_shape(const Var<S>& a, const Var<S>& b, const char* op) {
    require(a.shape() == b.shape(), ErrorCode::InvalidInput,
            std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

template <class S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
    check_same_shape(a, b, "add");
    TensorT<S> out = a.value();
    for (int64_t i = 0; i < out.numel(); ++i) out[i] += b.value()[i];
    auto an = a.node(), bn = b.node();
    return make_op<S>("add", std::move(out), {an, bn}, [an, bn](Node<S>& n) {
        if (an->requires_grad) {
            auto& g = an->ensure_grad();
            for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
        }
        if (bn->requires_grad) {
            auto& g = bn->ensure_grad();
            for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
        }
    });
}

template <class S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
    check_same_shape(a, b, "sub");
    TensorT<S> out = a.value();
    for (int64_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
    auto an = a.node(), bn = b.node();
    return make_op<S>("sub", std::move(out), {an, bn}, [an, bn](Node<S>& n) {
        if (an->requires_grad) {
            auto& g = an->ensure_grad();
            for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
        }
        if (bn->requires_grad) {
            auto& g = bn->ensure_grad();
            for (int64_t i = 0; i < g.numel(); ++i) g[i] -= n.grad[i];
        }
    });
}

template <class S>
Var<S> mul(const Var<S>& a, const Var<S>& b) {
    check_same_shape(a, b, "mul");
    TensorT<S> out = a.value();
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
    auto an = a.node(), bn = b.node();
    return make_op<S>("mul", std::move(out), {an, bn}, [an, bn](Node<S>& n) {
        if (an->requires_grad) {
            auto& g = an->ensure_grad();
            for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            auto& g = bn->ensure_grad();
            for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * an->value[i];
        }
    });
}

template <class S>
Var<S> scale(const Var<S>& a, S factor) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v *= factor;
    auto an = a.node();
    return make_op<S>("scale", std::move(out), {an}, [an, factor](Node<S>& n) {
        auto& g = an->ensure_grad();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * factor;
    });
}

template <class S>
Var<S> relu(const Var<S>& a) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v = v > S(0) ? v : S(0);
    auto an = a.node();
    return make_op<S>("relu", std::move(out), {an}, [an](Node<S>& n) {
        auto& g = an->ensure_grad();
        for (int64_t i = 0; i < g.numel(); ++i)
            if (an->value[i] > S(0)) g[i] += n.grad[i];
    });
}

template <class S>
Var<S> sigmoid(const Var<S>& a) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v = S(1) / (S(1) + std::exp(-v));
    auto an = a.node();
    auto saved = std::make_shared<TensorT<S>>(out);
    return make_op<S>("sigmoid", std::move(out), {an}, [an, saved](Node<S>& n) {
        auto& g = an->ensure_grad();
        for (int64_t i = 0; i < g.numel(); ++i) {
            S s = (*saved)[i];
            g[i] += n.grad[i] * s * (S(1) - s);
        }
    });
}

template <class S>
Var<S> exp_op(const Var<S>& a) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v = std::exp(v);
    auto an = a.node();
    auto saved = std::make_shared<TensorT<S>>(out);
    return make_op<S>("exp", std::move(out), {an}, [an, saved](Node<S>& n) {
        auto& g = an->ensure_grad();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * (*saved)[i];
    });
}

// Gradient barrier: value flows, gradient does not.
template <class S>
Var<S> detach(const Var<S>& a) {
    return Var<S>::leaf(a.value(), false);
}

template <class S>
Var<S> sum(const Var<S>& a) {
    S total = 0;
    for (S v : a.value().data) total += v;
    auto an = a.node();
    return make_op<S>("sum", TensorT<S>({1}, {total}), {an}, [an](Node<S>& n) {
        auto& g = an->ensure_grad();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[0];
    });
}

template <class S>
Var<S> mean(const Var<S>& a) {
    S total = 0;
    for (S v : a.value().data) total += v;
    const S inv = S(1) / static_cast<S>(a.value().numel());
    auto an = a.node();
    return make_op<S>("mean", TensorT<S>({1}, {total * inv}), {an}, [an, inv](Node<S>& n) {
        auto& g = an->ensure_grad();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[0] * inv;
    });
}

// Mean squared error against a variable target (use detach() for constants).
template <class S>
Var<S> mse(const Var<S>& a, const Var<S>& b) {
    check_same_shape(a, b, "mse");
    S total = 0;
    for (int64_t i = 0; i < a.value().numel(); ++i) {
        S d = a.value()[i] - b.value()[i];
        total += d * d;
    }
    const S inv = S(1) / static_cast<S>(a.value().numel());
    auto an = a.node(), bn = b.node();
    return make_op<S>("mse", TensorT<S>({1}, {total * inv}), {an, bn}, [an, bn, inv](Node<S>& n) {
        const S c = S(2) * inv * n.grad[0];
        if (an->requires_grad) {
            auto& g = an->ensure_grad();
            for (int64_t i = 0; i < g.numel(); ++i) g[i] += c * (an->value[i] - bn->value[i]);
        }
        if (bn->requires_grad) {
            auto& g = bn->ensure_grad();
            for (int64_t i = 0; i < g.numel(); ++i) g[i] -= c * (an->value[i] - bn->value[i]);
        }
    });
}

template <class S>
Var<S> reshape(const Var<S>& a, std::vector<int> new_shape) {
    require(TensorT<S>::numel_of(new_shape) == a.value().numel(), ErrorCode::InvalidInput,
            "reshape: element count mismatch");
    TensorT<S> out(new_shape, a.value().data);
    auto an = a.node();
    return make_op<S>("reshape", std::move(out), {an}, [an](Node<S>& n) {
        auto& g = an->ensure_grad();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    });
}

// (B,C,H,W) -> (B,c1-c0,H,W) channel slice.
template <class S>
Var<S> slice_channels(const Var<S>& a, int c0, int c1) {
    const auto& shp = a.shape();
    require(shp.size() == 4, ErrorCode::InvalidInput, "slice_channels: expected 4-d input");
    require(0 <= c0 && c0 < c1 && c1 <= shp[1], ErrorCode::InvalidInput,
            "slice_channels: bad channel range");
    const int b = shp[0], c = shp[1], h = shp[2], w = shp[3];
    const int co = c1 - c0;
    const int64_t plane = static_cast<int64_t>(h) * w;
    TensorT<S> out({b, co, h, w});
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < co; ++j)
            std::copy_n(a.value().data.begin() + ((static_cast<int64_t>(i) * c + c0 + j) * plane),
                        plane, out.data.begin() + ((static_cast<int64_t>(i) * co + j) * plane));
    auto an = a.node();
    return make_op<S>("slice_channels", std::move(out), {an}, [an, b, c, co, c0, plane](Node<S>& n) {
        auto& g = an->ensure_grad();
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < co; ++j) {
                const S* src = n.grad.data.data() + ((static_cast<int64_t>(i) * co + j) * plane);
                S* dst = g.data.data() + ((static_cast<int64_t>(i) * c + c0 + j) * plane);
                for (int64_t k = 0; k < plane; ++k) dst[k] += src[k];
            }
    });
}

// Per-pixel softmax cross-entropy over the channel dimension, averaged over
// batch and pixels. `target` holds one-hot (or soft) distributions.
template <class S>
Var<S> softmax_cross_entropy(const Var<S>& logits, const TensorT<S>& target) {
    require(logits.shape() == target.shape, ErrorCode::InvalidInput,
            "softmax_cross_entropy: shape mismatch");
    const auto& shp = logits.shape();
    require(shp.size() == 4, ErrorCode::InvalidInput, "softmax_cross_entropy: expected 4-d input");
    const int b = shp[0], c = shp[1], h = shp[2], w = shp[3];
    const int64_t plane = static_cast<int64_t>(h) * w;
    const int64_t pixels = static_cast<int64_t>(b) * plane;

    auto softmax = std::make_shared<TensorT<S>>(logits.value().shape);
    const TensorT<S>& x = logits.value();
    double total = 0.0;
    for (int i = 0; i < b; ++i) {
        for (int64_t p = 0; p < plane; ++p) {
            const int64_t base = static_cast<int64_t>(i) * c * plane + p;
            S m = x.data[base];
            for (int j = 1; j < c; ++j) m = std::max(m, x.data[base + j * plane]);
            double z = 0.0;
            for (int j = 0; j < c; ++j) z += std::exp(static_cast<double>(x.data[base + j * plane] - m));
            const double logz = std::log(z);
            for (int j = 0; j < c; ++j) {
                const int64_t idx = base + j * plane;
                const double logp = static_cast<double>(x.data[idx] - m) - logz;
                (*softmax).data[idx] = static_cast<S>(std::exp(logp));
                total -= static_cast<double>(target.data[idx]) * logp;
            }
        }
    }
    auto tgt = std::make_shared<TensorT<S>>(target);
    auto ln = logits.node();
    const S inv = S(1) / static_cast<S>(pixels);
    return make_op<S>("softmax_ce", TensorT<S>({1}, {static_cast<S>(total / pixels)}), {ln},
                      [ln, softmax, tgt, inv](Node<S>& n) {
                          auto& g = ln->ensure_grad();
                          const S c0 = n.grad[0] * inv;
                          for (int64_t i = 0; i < g.numel(); ++i)
                              g[i] += c0 * ((*softmax)[i] - (*tgt)[i]);
                      });
}

// Plain-tensor softmax over channels (inference-side head).
template <class S>
TensorT<S> softmax_channels(const TensorT<S>& logits) {
    require(logits.rank() == 4, ErrorCode::InvalidInput, "softmax_channels: expected 4-d input");
    const int b = logits.dim(0), c = logits.dim(1);
    const int64_t plane = static_cast<int64_t>(logits.dim(2)) * logits.dim(3);
    TensorT<S> out(logits.shape);
    for (int i = 0; i < b; ++i) {
        for (int64_t p = 0; p < plane; ++p) {
            const int64_t base = static_cast<int64_t>(i) * c * plane + p;
            S m = logits.data[base];
            for (int j = 1; j < c; ++j) m = std::max(m, logits.data[base + j * plane]);
            double z = 0.0;
            for (int j = 0; j < c; ++j)
                z += std::exp(static_cast<double>(logits.data[base + j * plane] - m));
            for (int j = 0; j < c; ++j)
                out.data[base + j * plane] = static_cast<S>(
                    std::exp(static_cast<double>(logits.data[base + j * plane] - m)) / z);
        }
    }
    return out;
}

}  // namespace sonovis::ad
