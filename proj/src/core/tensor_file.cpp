#include "sonovis/core/tensor_file.hpp"

#include <cstring>
#include <fstream>

namespace sonovis {

namespace {
constexpr char kMagic[8] = {'V', 'T', 'S', 'R', '1', '\0', '\0', '\0'};
}

void write_vtsr(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::Runtime, "cannot open for write: " + path.string());
    out.write(kMagic, 8);
    uint32_t rank = static_cast<uint32_t>(t.shape.size());
    out.write(reinterpret_cast<const char*>(&rank), 4);
    for (int d : t.shape) {
        uint32_t ud = static_cast<uint32_t>(d);
        out.write(reinterpret_cast<const char*>(&ud), 4);
    }
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    require(out.good(), ErrorCode::Runtime, "write failed: " + path.string());
}

Tensor read_vtsr(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::MissingInput, "cannot open tensor file: " + path.string());
    char magic[8];
    in.read(magic, 8);
    require(in.good() && std::memcmp(magic, kMagic, 8) == 0, ErrorCode::InvalidInput,
            "bad tensor file magic: " + path.string());
    uint32_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), 4);
    require(in.good() && rank <= 8, ErrorCode::InvalidInput, "bad tensor rank: " + path.string());
    std::vector<int> shape(rank);
    for (uint32_t i = 0; i < rank; ++i) {
        uint32_t d = 0;
        in.read(reinterpret_cast<char*>(&d), 4);
        shape[i] = static_cast<int>(d);
    }
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    require(in.gcount() == static_cast<std::streamsize>(t.data.size() * sizeof(float)),
            ErrorCode::InvalidInput, "truncated tensor file: " + path.string());
    return t;
}

}  // namespace sonovis
