#include "sonovis/core/image.hpp"

#include <algorithm>
#include <cmath>

namespace sonovis {

namespace {

void check_resize_args(const Tensor& chw, int out_h, int out_w) {
    require(chw.rank() == 3, ErrorCode::InvalidInput, "resize expects CxHxW, got " + shape_str(chw.shape));
    require(chw.dim(1) >= 1 && chw.dim(2) >= 1, ErrorCode::InvalidInput, "resize: empty input");
    require(out_h > 0 && out_w > 0, ErrorCode::InvalidInput, "resize: non-positive target size");
}

inline int nearest_src(int dst, int dst_size, int src_size) {
    // floor((dst + 0.5) * src / dst) lands on the pixel whose center is nearest
    int s = static_cast<int>(std::floor((dst + 0.5) * static_cast<double>(src_size) / dst_size));
    return std::clamp(s, 0, src_size - 1);
}

}  // namespace

Tensor resize_bilinear(const Tensor& chw, int out_h, int out_w) {
    check_resize_args(chw, out_h, out_w);
    const int c = chw.dim(0), in_h = chw.dim(1), in_w = chw.dim(2);
    if (in_h == out_h && in_w == out_w) return chw;

    Tensor out({c, out_h, out_w});
    const double sy = static_cast<double>(in_h) / out_h;
    const double sx = static_cast<double>(in_w) / out_w;
    for (int oy = 0; oy < out_h; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(in_h - 1));
        int y0 = static_cast<int>(std::floor(fy));
        int y1 = std::min(y0 + 1, in_h - 1);
        double wy = fy - y0;
        for (int ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(in_w - 1));
            int x0 = static_cast<int>(std::floor(fx));
            int x1 = std::min(x0 + 1, in_w - 1);
            double wx = fx - x0;
            for (int ch = 0; ch < c; ++ch) {
                double top = (1.0 - wx) * chw.at3(ch, y0, x0) + wx * chw.at3(ch, y0, x1);
                double bot = (1.0 - wx) * chw.at3(ch, y1, x0) + wx * chw.at3(ch, y1, x1);
                out.at3(ch, oy, ox) = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

Tensor resize_nearest(const Tensor& chw, int out_h, int out_w) {
    check_resize_args(chw, out_h, out_w);
    const int c = chw.dim(0), in_h = chw.dim(1), in_w = chw.dim(2);
    Tensor out({c, out_h, out_w});
    for (int oy = 0; oy < out_h; ++oy) {
        int sy = nearest_src(oy, out_h, in_h);
        for (int ox = 0; ox < out_w; ++ox) {
            int sx = nearest_src(ox, out_w, in_w);
            for (int ch = 0; ch < c; ++ch) out.at3(ch, oy, ox) = chw.at3(ch, sy, sx);
        }
    }
    return out;
}

std::vector<int> resize_nearest_ids(const std::vector<int>& ids, int in_h, int in_w,
                                    int out_h, int out_w) {
    require(static_cast<int64_t>(ids.size()) == static_cast<int64_t>(in_h) * in_w,
            ErrorCode::InvalidInput, "resize_nearest_ids: size mismatch");
    require(out_h > 0 && out_w > 0, ErrorCode::InvalidInput, "resize: non-positive target size");
    std::vector<int> out(static_cast<size_t>(out_h) * out_w);
    for (int oy = 0; oy < out_h; ++oy) {
        int sy = nearest_src(oy, out_h, in_h);
        for (int ox = 0; ox < out_w; ++ox) {
            int sx = nearest_src(ox, out_w, in_w);
            out[static_cast<size_t>(oy) * out_w + ox] = ids[static_cast<size_t>(sy) * in_w + sx];
        }
    }
    return out;
}

}  // namespace sonovis
