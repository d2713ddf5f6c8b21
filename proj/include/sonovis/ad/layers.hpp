#pragma once

#include <json.hpp>

#include <memory>
#include <string>

#include "sonovis/ad/conv_kernels.hpp"
#include "sonovis/ad/graph.hpp"
#include "sonovis/core/rng.hpp"

namespace sonovis::ad {

using json = nlohmann::json;

// Serializable layer description; the checkpoint metadata stores these so a
// network can be rebuilt without the code that configured it.
struct LayerSpec {
    std::string kind;  // conv2d | tconv2d | dense | relu | batchnorm2d | dropout |
                       // gap | maxpool2d | resblock | resblock_down | reshape | sigmoid
    int in_ch = 0;
    int out_ch = 0;
    int kernel = 0;
    int stride = 1;
    int pad = 0;
    double p = 0.0;          // dropout probability
    std::vector<int> dims;   // reshape target (C,H,W)

    json to_json() const {
        json j{{"kind", kind}};
        if (in_ch) j["in"] = in_ch;
        if (out_ch) j["out"] = out_ch;
        if (kernel) j["k"] = kernel;
        if (stride != 1) j["s"] = stride;
        if (pad) j["pad"] = pad;
        if (p != 0.0) j["p"] = p;
        if (!dims.empty()) j["dims"] = dims;
        return j;
    }
    static LayerSpec from_json(const json& j) {
        LayerSpec s;
        s.kind = j.at("kind").get<std::string>();
        s.in_ch = j.value("in", 0);
        s.out_ch = j.value("out", 0);
        s.kernel = j.value("k", 0);
        s.stride = j.value("s", 1);
        s.pad = j.value("pad", 0);
        s.p = j.value("p", 0.0);
        if (j.contains("dims")) s.dims = j.at("dims").get<std::vector<int>>();
        return s;
    }
};

inline LayerSpec conv_spec(int in_ch, int out_ch, int kernel, int stride, int pad) {
    return {.kind = "conv2d", .in_ch = in_ch, .out_ch = out_ch, .kernel = kernel, .stride = stride, .pad = pad};
}
inline LayerSpec tconv_spec(int in_ch, int out_ch, int kernel, int stride, int pad) {
    return {.kind = "tconv2d", .in_ch = in_ch, .out_ch = out_ch, .kernel = kernel, .stride = stride, .pad = pad};
}
inline LayerSpec dense_spec(int in_features, int out_features) {
    return {.kind = "dense", .in_ch = in_features, .out_ch = out_features};
}
inline LayerSpec relu_spec() { return {.kind = "relu"}; }
inline LayerSpec sigmoid_spec() { return {.kind = "sigmoid"}; }
inline LayerSpec batchnorm_spec(int channels) { return {.kind = "batchnorm2d", .in_ch = channels, .out_ch = channels}; }
inline LayerSpec dropout_spec(double p) { return {.kind = "dropout", .p = p}; }
inline LayerSpec gap_spec() { return {.kind = "gap"}; }
inline LayerSpec maxpool_spec(int kernel, int stride, int pad) {
    return {.kind = "maxpool2d", .kernel = kernel, .stride = stride, .pad = pad};
}
inline LayerSpec resblock_spec(int channels) {
    return {.kind = "resblock", .in_ch = channels, .out_ch = channels};
}
inline LayerSpec resblock_down_spec(int in_ch, int out_ch) {
    return {.kind = "resblock_down", .in_ch = in_ch, .out_ch = out_ch, .stride = 2};
}
inline LayerSpec reshape_spec(std::vector<int> chw) {
    return {.kind = "reshape", .dims = std::move(chw)};
}

struct Context {
    Mode mode = Mode::Eval;
    RandomStream* rng = nullptr;  // required by dropout in train mode
};

template <class S>
struct NamedParam {
    std::string name;
    NodePtr<S> node;
};
template <class S>
struct NamedBuffer {
    std::string name;
    TensorT<S>* tensor;
};

template <class S>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Var<S> forward(const Var<S>& x, const Context& ctx) = 0;
    virtual const char* name() const = 0;
    virtual void collect_params(const std::string& prefix, std::vector<NamedParam<S>>& out) {}
    virtual void collect_buffers(const std::string& prefix, std::vector<NamedBuffer<S>>& out) {}
};

namespace detail {

template <class S>
Var<S> init_param(std::vector<int> shape, double bound, RandomStream& rng) {
    TensorT<S> t(std::move(shape));
    for (auto& v : t.data) v = static_cast<S>(rng.uniform(-bound, bound));
    return Var<S>::leaf(std::move(t), true);
}

inline void check_4d(const std::vector<int>& shp, const char* layer) {
    require(shp.size() == 4, ErrorCode::InvalidInput,
            std::string(layer) + ": expected 4-d NCHW input, got " + shape_str(shp));
}

}  // namespace detail

// Strided 2-d convolution; weight stored as (out_ch, in_ch*k*k) so the
// forward is a straight GEMM against the im2col patch matrix.
template <class S>
class Conv2d : public Layer<S> {
public:
    Conv2d(const LayerSpec& spec, RandomStream& rng) : spec_(spec) {
        const int fan_in = spec.in_ch * spec.kernel * spec.kernel;
        weight_ = detail::init_param<S>({spec.out_ch, fan_in}, std::sqrt(6.0 / fan_in), rng);
        bias_ = detail::init_param<S>({spec.out_ch}, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
    }

    const char* name() const override { return "conv2d"; }

    Var<S> forward(const Var<S>& x, const Context&) override {
        detail::check_4d(x.shape(), "conv2d");
        const auto& shp = x.shape();
        require(shp[1] == spec_.in_ch, ErrorCode::InvalidInput,
                "conv2d: expected " + std::to_string(spec_.in_ch) + " input channels, got " +
                    std::to_string(shp[1]));
        const int b = shp[0], h = shp[2], w = shp[3];
        const int k = spec_.kernel, s = spec_.stride, p = spec_.pad;
        const int oh = conv_out_size(h, k, s, p), ow = conv_out_size(w, k, s, p);
        require(oh > 0 && ow > 0, ErrorCode::InvalidInput, "conv2d: input smaller than kernel");
        const int rows = spec_.in_ch * k * k;
        const int64_t cols = static_cast<int64_t>(oh) * ow;

        TensorT<S> out({b, spec_.out_ch, oh, ow});
        std::vector<S> col(static_cast<size_t>(rows) * cols);
        ConstMapRM<S> wm(weight_.value().data.data(), spec_.out_ch, rows);
        for (int i = 0; i < b; ++i) {
            im2col(x.value().data.data() + static_cast<int64_t>(i) * spec_.in_ch * h * w,
                   spec_.in_ch, h, w, k, s, p, col.data());
            ConstMapRM<S> cm(col.data(), rows, cols);
            MapRM<S> om(out.data.data() + static_cast<int64_t>(i) * spec_.out_ch * cols,
                        spec_.out_ch, cols);
            om.noalias() = wm * cm;
            for (int c = 0; c < spec_.out_ch; ++c) om.row(c).array() += bias_.value()[c];
        }

        auto xn = x.node();
        auto wn = weight_.node();
        auto bn = bias_.node();
        LayerSpec spec = spec_;
        return make_op<S>("conv2d", std::move(out), {xn, wn, bn},
                          [xn, wn, bn, spec, b, h, w, oh, ow, rows, cols](Node<S>& n) {
            const int k = spec.kernel, s = spec.stride, p = spec.pad;
            std::vector<S> col(static_cast<size_t>(rows) * cols);
            std::vector<S> dcol(static_cast<size_t>(rows) * cols);
            ConstMapRM<S> wm(wn->value.data.data(), spec.out_ch, rows);
            const bool need_dx = xn->requires_grad;
            if (need_dx) xn->ensure_grad();
            auto& wg = wn->ensure_grad();
            auto& bg = bn->ensure_grad();
            MapRM<S> wgm(wg.data.data(), spec.out_ch, rows);
            for (int i = 0; i < b; ++i) {
                ConstMapRM<S> gm(n.grad.data.data() + static_cast<int64_t>(i) * spec.out_ch * cols,
                                 spec.out_ch, cols);
                im2col(xn->value.data.data() + static_cast<int64_t>(i) * spec.in_ch * h * w,
                       spec.in_ch, h, w, k, s, p, col.data());
                ConstMapRM<S> cm(col.data(), rows, cols);
                wgm.noalias() += gm * cm.transpose();
                for (int c = 0; c < spec.out_ch; ++c) bg[c] += gm.row(c).sum();
                if (need_dx) {
                    MapRM<S> dcm(dcol.data(), rows, cols);
                    dcm.noalias() = wm.transpose() * gm;
                    col2im(dcol.data(), spec.in_ch, h, w, k, s, p,
                           xn->grad.data.data() + static_cast<int64_t>(i) * spec.in_ch * h * w);
                }
            }
        });
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<S>>& out) override {
        out.push_back({prefix + "weight", weight_.node()});
        out.push_back({prefix + "bias", bias_.node()});
    }

private:
    LayerSpec spec_;
    Var<S> weight_, bias_;
};

// Transposed convolution, realized as the data-gradient of a forward
// convolution; weight stored as (in_ch, out_ch*k*k).
template <class S>
class TConv2d : public Layer<S> {
public:
    TConv2d(const LayerSpec& spec, RandomStream& rng) : spec_(spec) {
        const int fan_in = spec.in_ch * spec.kernel * spec.kernel;
        weight_ = detail::init_param<S>({spec.in_ch, spec.out_ch * spec.kernel * spec.kernel},
                                        std::sqrt(6.0 / fan_in), rng);
        bias_ = detail::init_param<S>({spec.out_ch}, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
    }

    const char* name() const override { return "tconv2d"; }

    Var<S> forward(const Var<S>& x, const Context&) override {
        detail::check_4d(x.shape(), "tconv2d");
        const auto& shp = x.shape();
        require(shp[1] == spec_.in_ch, ErrorCode::InvalidInput,
                "tconv2d: expected " + std::to_string(spec_.in_ch) + " input channels, got " +
                    std::to_string(shp[1]));
        const int b = shp[0], h = shp[2], w = shp[3];
        const int k = spec_.kernel, s = spec_.stride, p = spec_.pad;
        const int oh = tconv_out_size(h, k, s, p), ow = tconv_out_size(w, k, s, p);
        require(oh > 0 && ow > 0, ErrorCode::InvalidInput, "tconv2d: degenerate output size");
        const int rows = spec_.out_ch * k * k;
        const int64_t cols = static_cast<int64_t>(h) * w;
        const int64_t out_plane = static_cast<int64_t>(oh) * ow;

        TensorT<S> out({b, spec_.out_ch, oh, ow});
        std::vector<S> col(static_cast<size_t>(rows) * cols);
        ConstMapRM<S> wm(weight_.value().data.data(), spec_.in_ch, rows);
        for (int i = 0; i < b; ++i) {
            ConstMapRM<S> xm(x.value().data.data() + static_cast<int64_t>(i) * spec_.in_ch * cols,
                             spec_.in_ch, cols);
            MapRM<S> cm(col.data(), rows, cols);
            cm.noalias() = wm.transpose() * xm;
            S* dst = out.data.data() + static_cast<int64_t>(i) * spec_.out_ch * out_plane;
            col2im(col.data(), spec_.out_ch, oh, ow, k, s, p, dst);
            for (int c = 0; c < spec_.out_ch; ++c) {
                S* plane = dst + static_cast<int64_t>(c) * out_plane;
                for (int64_t j = 0; j < out_plane; ++j) plane[j] += bias_.value()[c];
            }
        }

        auto xn = x.node();
        auto wn = weight_.node();
        auto bn = bias_.node();
        LayerSpec spec = spec_;
        return make_op<S>("tconv2d", std::move(out), {xn, wn, bn},
                          [xn, wn, bn, spec, b, h, w, oh, ow, rows, cols, out_plane](Node<S>& n) {
            const int k = spec.kernel, s = spec.stride, p = spec.pad;
            std::vector<S> colg(static_cast<size_t>(rows) * cols);
            ConstMapRM<S> wm(wn->value.data.data(), spec.in_ch, rows);
            const bool need_dx = xn->requires_grad;
            if (need_dx) xn->ensure_grad();
            auto& wg = wn->ensure_grad();
            auto& bg = bn->ensure_grad();
            MapRM<S> wgm(wg.data.data(), spec.in_ch, rows);
            for (int i = 0; i < b; ++i) {
                const S* gy = n.grad.data.data() + static_cast<int64_t>(i) * spec.out_ch * out_plane;
                im2col(gy, spec.out_ch, oh, ow, k, s, p, colg.data());
                ConstMapRM<S> cgm(colg.data(), rows, cols);
                ConstMapRM<S> xm(xn->value.data.data() + static_cast<int64_t>(i) * spec.in_ch * cols,
                                 spec.in_ch, cols);
                wgm.noalias() += xm * cgm.transpose();
                for (int c = 0; c < spec.out_ch; ++c) {
                    const S* plane = gy + static_cast<int64_t>(c) * out_plane;
                    S acc = 0;
                    for (int64_t j = 0; j < out_plane; ++j) acc += plane[j];
                    bg[c] += acc;
                }
                if (need_dx) {
                    MapRM<S> xgm(xn->grad.data.data() + static_cast<int64_t>(i) * spec.in_ch * cols,
                                 spec.in_ch, cols);
                    xgm.noalias() += wm * cgm;
                }
            }
        });
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<S>>& out) override {
        out.push_back({prefix + "weight", weight_.node()});
        out.push_back({prefix + "bias", bias_.node()});
    }

private:
    LayerSpec spec_;
    Var<S> weight_, bias_;
};

template <class S>
class Dense : public Layer<S> {
public:
    Dense(const LayerSpec& spec, RandomStream& rng) : spec_(spec) {
        weight_ = detail::init_param<S>({spec.out_ch, spec.in_ch}, std::sqrt(6.0 / spec.in_ch), rng);
        bias_ = detail::init_param<S>({spec.out_ch}, 1.0 / std::sqrt(static_cast<double>(spec.in_ch)), rng);
    }

    const char* name() const override { return "dense"; }

    Var<S> forward(const Var<S>& x, const Context&) override {
        const auto& shp = x.shape();
        require(shp.size() == 2, ErrorCode::InvalidInput,
                "dense: expected (batch, features) input, got " + shape_str(shp));
        require(shp[1] == spec_.in_ch, ErrorCode::InvalidInput,
                "dense: expected " + std::to_string(spec_.in_ch) + " features, got " +
                    std::to_string(shp[1]));
        const int b = shp[0];
        TensorT<S> out({b, spec_.out_ch});
        ConstMapRM<S> xm(x.value().data.data(), b, spec_.in_ch);
        ConstMapRM<S> wm(weight_.value().data.data(), spec_.out_ch, spec_.in_ch);
        MapRM<S> om(out.data.data(), b, spec_.out_ch);
        om.noalias() = xm * wm.transpose();
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < spec_.out_ch; ++j) om(i, j) += bias_.value()[j];

        auto xn = x.node();
        auto wn = weight_.node();
        auto bn = bias_.node();
        const int fin = spec_.in_ch, fout = spec_.out_ch;
        return make_op<S>("dense", std::move(out), {xn, wn, bn}, [xn, wn, bn, b, fin, fout](Node<S>& n) {
            ConstMapRM<S> gm(n.grad.data.data(), b, fout);
            ConstMapRM<S> xm(xn->value.data.data(), b, fin);
            ConstMapRM<S> wm(wn->value.data.data(), fout, fin);
            MapRM<S>(wn->ensure_grad().data.data(), fout, fin).noalias() += gm.transpose() * xm;
            auto& bg = bn->ensure_grad();
            for (int j = 0; j < fout; ++j) bg[j] += gm.col(j).sum();
            if (xn->requires_grad)
                MapRM<S>(xn->ensure_grad().data.data(), b, fin).noalias() += gm * wm;
        });
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<S>>& out) override {
        out.push_back({prefix + "weight", weight_.node()});
        out.push_back({prefix + "bias", bias_.node()});
    }

private:
    LayerSpec spec_;
    Var<S> weight_, bias_;
};

template <class S>
class Relu : public Layer<S> {
public:
    const char* name() const override { return "relu"; }
    Var<S> forward(const Var<S>& x, const Context&) override { return relu(x); }
};

template <class S>
class Sigmoid : public Layer<S> {
public:
    const char* name() const override { return "sigmoid"; }
    Var<S> forward(const Var<S>& x, const Context&) override { return sigmoid(x); }
};

// Batch statistics over (B,H,W) per channel in train mode, frozen running
// statistics in eval mode (a pure affine map).
template <class S>
class BatchNorm2d : public Layer<S> {
public:
    BatchNorm2d(const LayerSpec& spec, RandomStream&) : channels_(spec.in_ch) {
        gamma_ = Var<S>::leaf(TensorT<S>::full({channels_}, S(1)), true);
        beta_ = Var<S>::leaf(TensorT<S>::zeros({channels_}), true);
        running_mean_ = TensorT<S>::zeros({channels_});
        running_var_ = TensorT<S>::full({channels_}, S(1));
    }

    const char* name() const override { return "batchnorm2d"; }

    Var<S> forward(const Var<S>& x, const Context& ctx) override {
        detail::check_4d(x.shape(), "batchnorm2d");
        const auto& shp = x.shape();
        require(shp[1] == channels_, ErrorCode::InvalidInput,
                "batchnorm2d: expected " + std::to_string(channels_) + " channels, got " +
                    std::to_string(shp[1]));
        const int b = shp[0], c = shp[1], h = shp[2], w = shp[3];
        const int64_t plane = static_cast<int64_t>(h) * w;
        const int64_t count = static_cast<int64_t>(b) * plane;

        std::vector<S> mean(static_cast<size_t>(c)), invstd(static_cast<size_t>(c));
        if (ctx.mode == Mode::Train) {
            for (int j = 0; j < c; ++j) {
                double m = 0;
                for (int i = 0; i < b; ++i) {
                    const S* p = x.value().data.data() + (static_cast<int64_t>(i) * c + j) * plane;
                    for (int64_t t = 0; t < plane; ++t) m += p[t];
                }
                m /= static_cast<double>(count);
                double var = 0;
                for (int i = 0; i < b; ++i) {
                    const S* p = x.value().data.data() + (static_cast<int64_t>(i) * c + j) * plane;
                    for (int64_t t = 0; t < plane; ++t) {
                        double d = p[t] - m;
                        var += d * d;
                    }
                }
                var /= static_cast<double>(count);  // biased, used for normalization
                mean[static_cast<size_t>(j)] = static_cast<S>(m);
                invstd[static_cast<size_t>(j)] = static_cast<S>(1.0 / std::sqrt(var + kEps));
                const double unbiased = count > 1 ? var * count / (count - 1) : var;
                running_mean_[j] = static_cast<S>((1.0 - kMomentum) * running_mean_[j] + kMomentum * m);
                running_var_[j] = static_cast<S>((1.0 - kMomentum) * running_var_[j] + kMomentum * unbiased);
            }
        } else {
            for (int j = 0; j < c; ++j) {
                mean[static_cast<size_t>(j)] = running_mean_[j];
                invstd[static_cast<size_t>(j)] =
                    static_cast<S>(1.0 / std::sqrt(static_cast<double>(running_var_[j]) + kEps));
            }
        }

        TensorT<S> out(x.shape());
        auto xhat = std::make_shared<TensorT<S>>(x.shape());
        for (int i = 0; i < b; ++i) {
            for (int j = 0; j < c; ++j) {
                const int64_t base = (static_cast<int64_t>(i) * c + j) * plane;
                const S m = mean[static_cast<size_t>(j)];
                const S is = invstd[static_cast<size_t>(j)];
                const S g = gamma_.value()[j], bt = beta_.value()[j];
                for (int64_t t = 0; t < plane; ++t) {
                    const S xh = (x.value().data[base + t] - m) * is;
                    (*xhat).data[base + t] = xh;
                    out.data[base + t] = g * xh + bt;
                }
            }
        }

        auto xn = x.node();
        auto gn = gamma_.node();
        auto bn = beta_.node();
        const bool train = ctx.mode == Mode::Train;
        auto istd = std::make_shared<std::vector<S>>(std::move(invstd));
        return make_op<S>("batchnorm2d", std::move(out), {xn, gn, bn},
                          [xn, gn, bn, xhat, istd, b, c, plane, count, train](Node<S>& n) {
            auto& gg = gn->ensure_grad();
            auto& bg = bn->ensure_grad();
            const bool need_dx = xn->requires_grad;
            if (need_dx) xn->ensure_grad();
            for (int j = 0; j < c; ++j) {
                double sum_dy = 0, sum_dy_xhat = 0;
                for (int i = 0; i < b; ++i) {
                    const int64_t base = (static_cast<int64_t>(i) * c + j) * plane;
                    for (int64_t t = 0; t < plane; ++t) {
                        sum_dy += n.grad.data[base + t];
                        sum_dy_xhat += n.grad.data[base + t] * (*xhat).data[base + t];
                    }
                }
                gg[j] += static_cast<S>(sum_dy_xhat);
                bg[j] += static_cast<S>(sum_dy);
                if (!need_dx) continue;
                const S g = gn->value[j];
                const S is = (*istd)[static_cast<size_t>(j)];
                if (train) {
                    const S mean_dy = static_cast<S>(sum_dy / static_cast<double>(count));
                    const S mean_dy_xhat = static_cast<S>(sum_dy_xhat / static_cast<double>(count));
                    for (int i = 0; i < b; ++i) {
                        const int64_t base = (static_cast<int64_t>(i) * c + j) * plane;
                        for (int64_t t = 0; t < plane; ++t)
                            xn->grad.data[base + t] +=
                                g * is * (n.grad.data[base + t] - mean_dy -
                                          (*xhat).data[base + t] * mean_dy_xhat);
                    }
                } else {
                    for (int i = 0; i < b; ++i) {
                        const int64_t base = (static_cast<int64_t>(i) * c + j) * plane;
                        for (int64_t t = 0; t < plane; ++t)
                            xn->grad.data[base + t] += g * is * n.grad.data[base + t];
                    }
                }
            }
        });
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<S>>& out) override {
        out.push_back({prefix + "gamma", gamma_.node()});
        out.push_back({prefix + "beta", beta_.node()});
    }
    void collect_buffers(const std::string& prefix, std::vector<NamedBuffer<S>>& out) override {
        out.push_back({prefix + "running_mean", &running_mean_});
        out.push_back({prefix + "running_var", &running_var_});
    }

private:
    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;
    int channels_;
    Var<S> gamma_, beta_;
    TensorT<S> running_mean_, running_var_;
};

// Inverted dropout: scales kept activations by 1/(1-p) in train mode,
// identity in eval mode.
template <class S>
class Dropout : public Layer<S> {
public:
    Dropout(const LayerSpec& spec, RandomStream&) : p_(spec.p) {
        require(p_ >= 0.0 && p_ < 1.0, ErrorCode::InvalidInput, "dropout: p must be in [0,1)");
    }

    const char* name() const override { return "dropout"; }

    Var<S> forward(const Var<S>& x, const Context& ctx) override {
        if (ctx.mode == Mode::Eval || p_ == 0.0) return x;
        require(ctx.rng != nullptr, ErrorCode::Runtime, "dropout: train mode needs an RNG");
        auto mask = std::make_shared<TensorT<S>>(x.shape());
        const S keep_scale = static_cast<S>(1.0 / (1.0 - p_));
        TensorT<S> out = x.value();
        for (int64_t i = 0; i < out.numel(); ++i) {
            const S m = ctx.rng->uniform() < p_ ? S(0) : keep_scale;
            (*mask)[i] = m;
            out[i] *= m;
        }
        auto xn = x.node();
        return make_op<S>("dropout", std::move(out), {xn}, [xn, mask](Node<S>& n) {
            auto& g = xn->ensure_grad();
            for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * (*mask)[i];
        });
    }

private:
    double p_;
};

// (B,C,H,W) -> (B,C) spatial mean.
template <class S>
class GlobalAvgPool : public Layer<S> {
public:
    const char* name() const override { return "gap"; }

    Var<S> forward(const Var<S>& x, const Context&) override {
        detail::check_4d(x.shape(), "gap");
        const auto& shp = x.shape();
        const int b = shp[0], c = shp[1];
        const int64_t plane = static_cast<int64_t>(shp[2]) * shp[3];
        TensorT<S> out({b, c});
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < c; ++j) {
                const S* p = x.value().data.data() + (static_cast<int64_t>(i) * c + j) * plane;
                double acc = 0;
                for (int64_t t = 0; t < plane; ++t) acc += p[t];
                out.at2(i, j) = static_cast<S>(acc / static_cast<double>(plane));
            }
        auto xn = x.node();
        return make_op<S>("gap", std::move(out), {xn}, [xn, b, c, plane](Node<S>& n) {
            auto& g = xn->ensure_grad();
            const S inv = S(1) / static_cast<S>(plane);
            for (int i = 0; i < b; ++i)
                for (int j = 0; j < c; ++j) {
                    const S gv = n.grad.at2(i, j) * inv;
                    S* p = g.data.data() + (static_cast<int64_t>(i) * c + j) * plane;
                    for (int64_t t = 0; t < plane; ++t) p[t] += gv;
                }
        });
    }
};

template <class S>
class MaxPool2d : public Layer<S> {
public:
    MaxPool2d(const LayerSpec& spec, RandomStream&) : spec_(spec) {}

    const char* name() const override { return "maxpool2d"; }

    Var<S> forward(const Var<S>& x, const Context&) override {
        detail::check_4d(x.shape(), "maxpool2d");
        const auto& shp = x.shape();
        const int b = shp[0], c = shp[1], h = shp[2], w = shp[3];
        const int k = spec_.kernel, s = spec_.stride, p = spec_.pad;
        const int oh = conv_out_size(h, k, s, p), ow = conv_out_size(w, k, s, p);
        require(oh > 0 && ow > 0, ErrorCode::InvalidInput, "maxpool2d: input smaller than kernel");
        TensorT<S> out({b, c, oh, ow});
        auto argmax = std::make_shared<std::vector<int64_t>>(out.data.size());
        for (int i = 0; i < b; ++i) {
            for (int j = 0; j < c; ++j) {
                const S* plane = x.value().data.data() + (static_cast<int64_t>(i) * c + j) * h * w;
                for (int oi = 0; oi < oh; ++oi) {
                    for (int oj = 0; oj < ow; ++oj) {
                        S best = -std::numeric_limits<S>::infinity();
                        int64_t best_idx = -1;
                        for (int ki = 0; ki < k; ++ki) {
                            const int y = oi * s + ki - p;
                            if (y < 0 || y >= h) continue;
                            for (int kj = 0; kj < k; ++kj) {
                                const int xw = oj * s + kj - p;
                                if (xw < 0 || xw >= w) continue;
                                const int64_t idx = static_cast<int64_t>(y) * w + xw;
                                if (plane[idx] > best) {
                                    best = plane[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                        const int64_t o = ((static_cast<int64_t>(i) * c + j) * oh + oi) * ow + oj;
                        out.data[static_cast<size_t>(o)] = best;
                        (*argmax)[static_cast<size_t>(o)] =
                            (static_cast<int64_t>(i) * c + j) * h * w + best_idx;
                    }
                }
            }
        }
        auto xn = x.node();
        return make_op<S>("maxpool2d", std::move(out), {xn}, [xn, argmax](Node<S>& n) {
            auto& g = xn->ensure_grad();
            for (size_t o = 0; o < argmax->size(); ++o)
                g.data[static_cast<size_t>((*argmax)[o])] += n.grad.data[o];
        });
    }

private:
    LayerSpec spec_;
};

// (B,F) -> (B,C,H,W).
template <class S>
class Reshape : public Layer<S> {
public:
    Reshape(const LayerSpec& spec, RandomStream&) : dims_(spec.dims) {
        require(dims_.size() == 3, ErrorCode::InvalidInput, "reshape: dims must be (C,H,W)");
    }
    const char* name() const override { return "reshape"; }
    Var<S> forward(const Var<S>& x, const Context&) override {
        const auto& shp = x.shape();
        require(shp.size() == 2, ErrorCode::InvalidInput, "reshape: expected (batch, features) input");
        return reshape(x, {shp[0], dims_[0], dims_[1], dims_[2]});
    }

private:
    std::vector<int> dims_;
};

template <class S>
class Sequential;

template <class S>
std::unique_ptr<Layer<S>> make_layer(const LayerSpec& spec, RandomStream& rng);

// Shape-preserving residual block: conv3x3-bn-relu-conv3x3-bn plus identity
// skip, relu after the add.
template <class S>
class ResBlock : public Layer<S> {
public:
    ResBlock(const LayerSpec& spec, RandomStream& rng)
        : conv1_(conv_spec(spec.in_ch, spec.out_ch, 3, 1, 1), rng),
          bn1_(batchnorm_spec(spec.out_ch), rng),
          conv2_(conv_spec(spec.out_ch, spec.out_ch, 3, 1, 1), rng),
          bn2_(batchnorm_spec(spec.out_ch), rng) {
        require(spec.in_ch == spec.out_ch, ErrorCode::InvalidInput,
                "resblock: shape-preserving block needs in == out channels");
    }

    const char* name() const override { return "resblock"; }

    Var<S> forward(const Var<S>& x, const Context& ctx) override {
        Var<S> y = bn1_.forward(conv1_.forward(x, ctx), ctx);
        y = relu(y);
        y = bn2_.forward(conv2_.forward(y, ctx), ctx);
        return relu(add(y, x));
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<S>>& out) override {
        conv1_.collect_params(prefix + "conv1.", out);
        bn1_.collect_params(prefix + "bn1.", out);
        conv2_.collect_params(prefix + "conv2.", out);
        bn2_.collect_params(prefix + "bn2.", out);
    }
    void collect_buffers(const std::string& prefix, std::vector<NamedBuffer<S>>& out) override {
        bn1_.collect_buffers(prefix + "bn1.", out);
        bn2_.collect_buffers(prefix + "bn2.", out);
    }

private:
    Conv2d<S> conv1_;
    BatchNorm2d<S> bn1_;
    Conv2d<S> conv2_;
    BatchNorm2d<S> bn2_;
};

// Downsampling residual block with a strided 1x1 projection skip.
template <class S>
class ResBlockDown : public Layer<S> {
public:
    ResBlockDown(const LayerSpec& spec, RandomStream& rng)
        : conv1_(conv_spec(spec.in_ch, spec.out_ch, 3, 2, 1), rng),
          bn1_(batchnorm_spec(spec.out_ch), rng),
          conv2_(conv_spec(spec.out_ch, spec.out_ch, 3, 1, 1), rng),
          bn2_(batchnorm_spec(spec.out_ch), rng),
          proj_(conv_spec(spec.in_ch, spec.out_ch, 1, 2, 0), rng),
          bnp_(batchnorm_spec(spec.out_ch), rng) {}

    const char* name() const override { return "resblock_down"; }

    Var<S> forward(const Var<S>& x, const Context& ctx) override {
        Var<S> y = bn1_.forward(conv1_.forward(x, ctx), ctx);
        y = relu(y);
        y = bn2_.forward(conv2_.forward(y, ctx), ctx);
        Var<S> skip = bnp_.forward(proj_.forward(x, ctx), ctx);
        return relu(add(y, skip));
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<S>>& out) override {
        conv1_.collect_params(prefix + "conv1.", out);
        bn1_.collect_params(prefix + "bn1.", out);
        conv2_.collect_params(prefix + "conv2.", out);
        bn2_.collect_params(prefix + "bn2.", out);
        proj_.collect_params(prefix + "proj.", out);
        bnp_.collect_params(prefix + "bnp.", out);
    }
    void collect_buffers(const std::string& prefix, std::vector<NamedBuffer<S>>& out) override {
        bn1_.collect_buffers(prefix + "bn1.", out);
        bn2_.collect_buffers(prefix + "bn2.", out);
        bnp_.collect_buffers(prefix + "bnp.", out);
    }

private:
    Conv2d<S> conv1_;
    BatchNorm2d<S> bn1_;
    Conv2d<S> conv2_;
    BatchNorm2d<S> bn2_;
    Conv2d<S> proj_;
    BatchNorm2d<S> bnp_;
};

template <class S>
class Sequential {
public:
    Sequential() = default;
    Sequential(std::vector<LayerSpec> specs, RandomStream& rng) : specs_(std::move(specs)) {
        layers_.reserve(specs_.size());
        for (const auto& s : specs_) layers_.push_back(make_layer<S>(s, rng));
    }

    Var<S> forward(const Var<S>& x, const Context& ctx) {
        Var<S> y = x;
        for (size_t i = 0; i < layers_.size(); ++i) {
            try {
                y = layers_[i]->forward(y, ctx);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::InvalidInput)
                    fail(e.code(), "layer " + std::to_string(i) + " (" + layers_[i]->name() +
                                       "): " + e.what());
                throw;
            }
        }
        return y;
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<S>>& out) {
        for (size_t i = 0; i < layers_.size(); ++i)
            layers_[i]->collect_params(prefix + std::to_string(i) + ".", out);
    }
    void collect_buffers(const std::string& prefix, std::vector<NamedBuffer<S>>& out) {
        for (size_t i = 0; i < layers_.size(); ++i)
            layers_[i]->collect_buffers(prefix + std::to_string(i) + ".", out);
    }

    const std::vector<LayerSpec>& specs() const { return specs_; }
    size_t size() const { return layers_.size(); }

    json specs_json() const {
        json arr = json::array();
        for (const auto& s : specs_) arr.push_back(s.to_json());
        return arr;
    }
    static std::vector<LayerSpec> specs_from_json(const json& arr) {
        std::vector<LayerSpec> out;
        for (const auto& j : arr) out.push_back(LayerSpec::from_json(j));
        return out;
    }

private:
    std::vector<LayerSpec> specs_;
    std::vector<std::unique_ptr<Layer<S>>> layers_;
};

template <class S>
std::unique_ptr<Layer<S>> make_layer(const LayerSpec& spec, RandomStream& rng) {
    if (spec.kind == "conv2d") return std::make_unique<Conv2d<S>>(spec, rng);
    if (spec.kind == "tconv2d") return std::make_unique<TConv2d<S>>(spec, rng);
    if (spec.kind == "dense") return std::make_unique<Dense<S>>(spec, rng);
    if (spec.kind == "relu") return std::make_unique<Relu<S>>();
    if (spec.kind == "sigmoid") return std::make_unique<Sigmoid<S>>();
    if (spec.kind == "batchnorm2d") return std::make_unique<BatchNorm2d<S>>(spec, rng);
    if (spec.kind == "dropout") return std::make_unique<Dropout<S>>(spec, rng);
    if (spec.kind == "gap") return std::make_unique<GlobalAvgPool<S>>();
    if (spec.kind == "maxpool2d") return std::make_unique<MaxPool2d<S>>(spec, rng);
    if (spec.kind == "resblock") return std::make_unique<ResBlock<S>>(spec, rng);
    if (spec.kind == "resblock_down") return std::make_unique<ResBlockDown<S>>(spec, rng);
    if (spec.kind == "reshape") return std::make_unique<Reshape<S>>(spec, rng);
    fail(ErrorCode::InvalidInput, "unknown layer kind: " + spec.kind);
}

}  // namespace sonovis::ad
