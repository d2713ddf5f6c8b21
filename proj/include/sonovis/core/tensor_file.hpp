#pragma once

#include <filesystem>

#include "sonovis/core/tensor.hpp"

namespace sonovis {

// .vtsr tensor files: 8-byte magic "VTSR1\0\0\0", u32 rank, rank x u32 dims,
// then row-major float32 payload. Everything little-endian.
void write_vtsr(const std::filesystem::path& path, const Tensor& t);
Tensor read_vtsr(const std::filesystem::path& path);

}  // namespace sonovis
