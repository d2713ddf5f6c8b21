#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "sonovis/core/error.hpp"

namespace sonovis {

// Dense row-major tensor of arbitrary rank. The scalar type is a template
// parameter so the float64 gradient-check path shares all kernels with the
// float32 training path.
template <class S>
struct TensorT {
    std::vector<int> shape;
    std::vector<S> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> shp) : shape(std::move(shp)) {
        data.assign(static_cast<size_t>(numel_of(shape)), S(0));
    }
    TensorT(std::vector<int> shp, std::vector<S> values)
        : shape(std::move(shp)), data(std::move(values)) {
        require(static_cast<int64_t>(data.size()) == numel_of(shape), ErrorCode::InvalidInput,
                "tensor data length does not match shape");
    }

    static int64_t numel_of(const std::vector<int>& shp) {
        int64_t n = 1;
        for (int d : shp) {
            require(d >= 0, ErrorCode::InvalidInput, "negative tensor dimension");
            n *= d;
        }
        return n;
    }

    static TensorT zeros(std::vector<int> shp) { return TensorT(std::move(shp)); }
    static TensorT full(std::vector<int> shp, S value) {
        TensorT t(std::move(shp));
        std::fill(t.data.begin(), t.data.end(), value);
        return t;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }

    S& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
    S operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

    // NCHW accessors for the 4-d case used throughout the networks.
    S& at4(int n, int c, int h, int w) {
        return data[((static_cast<size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    S at4(int n, int c, int h, int w) const {
        return data[((static_cast<size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    S& at3(int c, int h, int w) {
        return data[(static_cast<size_t>(c) * shape[1] + h) * shape[2] + w];
    }
    S at3(int c, int h, int w) const {
        return data[(static_cast<size_t>(c) * shape[1] + h) * shape[2] + w];
    }
    S& at2(int i, int j) { return data[static_cast<size_t>(i) * shape[1] + j]; }
    S at2(int i, int j) const { return data[static_cast<size_t>(i) * shape[1] + j]; }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }

    template <class T2>
    TensorT<T2> cast() const {
        TensorT<T2> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T2>(data[i]);
        return out;
    }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

template <class S>
inline bool all_finite(const TensorT<S>& t) {
    for (S v : t.data)
        if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
}

template <class S>
inline void check_finite(const TensorT<S>& t, const std::string& where) {
    if (!all_finite(t)) fail(ErrorCode::Runtime, "non-finite value produced in " + where);
}

inline std::string shape_str(const std::vector<int>& shp) {
    std::string s = "(";
    for (size_t i = 0; i < shp.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shp[i]);
    }
    return s + ")";
}

}  // namespace sonovis
