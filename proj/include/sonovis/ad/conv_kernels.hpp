#pragma once

#include <Eigen/Core>

#include "sonovis/core/tensor.hpp"

namespace sonovis::ad {

template <class S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MapRM = Eigen::Map<MatRM<S>>;
template <class S>
using ConstMapRM = Eigen::Map<const MatRM<S>>;

inline int conv_out_size(int in, int kernel, int stride, int pad) {
    return (in + 2 * pad - kernel) / stride + 1;
}

inline int tconv_out_size(int in, int kernel, int stride, int pad) {
    return (in - 1) * stride - 2 * pad + kernel;
}

// Unfolds one CxHxW image into a (C*k*k) x (OH*OW) row-major patch matrix;
// out-of-bounds taps are zero.
template <class S>
void im2col(const S* img, int channels, int h, int w, int kernel, int stride, int pad,
            S* col) {
    const int oh = conv_out_size(h, kernel, stride, pad);
    const int ow = conv_out_size(w, kernel, stride, pad);
    const int64_t cols = static_cast<int64_t>(oh) * ow;
    int64_t row = 0;
    for (int c = 0; c < channels; ++c) {
        const S* plane = img + static_cast<int64_t>(c) * h * w;
        for (int ki = 0; ki < kernel; ++ki) {
            for (int kj = 0; kj < kernel; ++kj, ++row) {
                S* dst = col + row * cols;
                for (int oi = 0; oi < oh; ++oi) {
                    const int y = oi * stride + ki - pad;
                    if (y < 0 || y >= h) {
                        std::fill_n(dst + static_cast<int64_t>(oi) * ow, ow, S(0));
                        continue;
                    }
                    const S* src = plane + static_cast<int64_t>(y) * w;
                    for (int oj = 0; oj < ow; ++oj) {
                        const int x = oj * stride + kj - pad;
                        dst[static_cast<int64_t>(oi) * ow + oj] =
                            (x >= 0 && x < w) ? src[x] : S(0);
                    }
                }
            }
        }
    }
}

// Scatter-add inverse of im2col.
template <class S>
void col2im(const S* col, int channels, int h, int w, int kernel, int stride, int pad,
            S* img) {
    const int oh = conv_out_size(h, kernel, stride, pad);
    const int ow = conv_out_size(w, kernel, stride, pad);
    const int64_t cols = static_cast<int64_t>(oh) * ow;
    int64_t row = 0;
    for (int c = 0; c < channels; ++c) {
        S* plane = img + static_cast<int64_t>(c) * h * w;
        for (int ki = 0; ki < kernel; ++ki) {
            for (int kj = 0; kj < kernel; ++kj, ++row) {
                const S* src = col + row * cols;
                for (int oi = 0; oi < oh; ++oi) {
                    const int y = oi * stride + ki - pad;
                    if (y < 0 || y >= h) continue;
                    S* dst = plane + static_cast<int64_t>(y) * w;
                    for (int oj = 0; oj < ow; ++oj) {
                        const int x = oj * stride + kj - pad;
                        if (x >= 0 && x < w) dst[x] += src[static_cast<int64_t>(oi) * ow + oj];
                    }
                }
            }
        }
    }
}

}  // namespace sonovis::ad
