#pragma once

#include "sonovis/core/tensor.hpp"

namespace sonovis {

// Per-channel bilinear resize of a CxHxW tensor, pixel-center sampling
// (align_corners disabled). Interpolation is convex, so output values stay
// within the input min/max.
Tensor resize_bilinear(const Tensor& chw, int out_h, int out_w);

// Nearest-neighbour resize, pixel-center convention. Used for class-id maps
// so labels are never blended.
Tensor resize_nearest(const Tensor& chw, int out_h, int out_w);
std::vector<int> resize_nearest_ids(const std::vector<int>& ids, int in_h, int in_w,
                                    int out_h, int out_w);

}  // namespace sonovis
