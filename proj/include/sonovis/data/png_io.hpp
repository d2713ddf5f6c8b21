#pragma once

#include <array>
#include <filesystem>

#include "sonovis/core/tensor.hpp"
#include "sonovis/metrics/segmentation.hpp"

namespace sonovis::data {

// Depth ground truth: 16-bit grayscale, values mapped from [0,1].
void write_png_gray16(const std::filesystem::path& path, const Tensor& hw01);
Tensor read_png_gray16(const std::filesystem::path& path);  // 1xHxW in [0,1]

// Segmentation ground truth / predictions: 8-bit paletted, pixel = class id.
using Palette = std::vector<std::array<uint8_t, 3>>;
void write_png_indexed(const std::filesystem::path& path, const metrics::ClassMap& ids,
                       const Palette& palette);
metrics::ClassMap read_png_indexed(const std::filesystem::path& path);

}  // namespace sonovis::data
