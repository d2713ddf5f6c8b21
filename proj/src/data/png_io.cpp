#include "sonovis/data/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace sonovis::data {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        require(png != nullptr, ErrorCode::Runtime, "png: writer allocation failed");
        info = png_create_info_struct(png);
        require(info != nullptr, ErrorCode::Runtime, "png: info allocation failed");
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        require(png != nullptr, ErrorCode::Runtime, "png: reader allocation failed");
        info = png_create_info_struct(png);
        require(info != nullptr, ErrorCode::Runtime, "png: info allocation failed");
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

}  // namespace

void write_png_gray16(const std::filesystem::path& path, const Tensor& img) {
    require(img.rank() == 3 && img.dim(0) == 1, ErrorCode::InvalidInput,
            "write_png_gray16: expected 1xHxW tensor");
    const int h = img.dim(1), w = img.dim(2);
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    require(f != nullptr, ErrorCode::Runtime, "cannot open for write: " + path.string());

    PngWriter ctx;
    if (setjmp(png_jmpbuf(ctx.png))) fail(ErrorCode::Runtime, "png write failed: " + path.string());
    png_init_io(ctx.png, f.get());
    png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 16,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    std::vector<uint8_t> row(static_cast<size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = std::clamp(static_cast<double>(img.at3(0, y, x)), 0.0, 1.0);
            const uint16_t q = static_cast<uint16_t>(std::lround(v * 65535.0));
            row[static_cast<size_t>(x) * 2] = static_cast<uint8_t>(q >> 8);  // big-endian per PNG
            row[static_cast<size_t>(x) * 2 + 1] = static_cast<uint8_t>(q & 0xff);
        }
        png_write_row(ctx.png, row.data());
    }
    png_write_end(ctx.png, nullptr);
}

Tensor read_png_gray16(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    require(f != nullptr, ErrorCode::MissingInput, "cannot open png: " + path.string());
    PngReader ctx;
    if (setjmp(png_jmpbuf(ctx.png))) fail(ErrorCode::InvalidInput, "png read failed: " + path.string());
    png_init_io(ctx.png, f.get());
    png_read_info(ctx.png, ctx.info);

    require(png_get_color_type(ctx.png, ctx.info) == PNG_COLOR_TYPE_GRAY &&
                png_get_bit_depth(ctx.png, ctx.info) == 16,
            ErrorCode::InvalidInput, "expected 16-bit grayscale png: " + path.string());
    const int w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    const int h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));

    Tensor img({1, h, w});
    std::vector<uint8_t> row(static_cast<size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        png_read_row(ctx.png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) {
            const uint16_t q = static_cast<uint16_t>((row[static_cast<size_t>(x) * 2] << 8) |
                                                     row[static_cast<size_t>(x) * 2 + 1]);
            img.at3(0, y, x) = static_cast<float>(q) / 65535.0f;
        }
    }
    return img;
}

void write_png_indexed(const std::filesystem::path& path, const metrics::ClassMap& ids,
                       const Palette& palette) {
    require(!palette.empty() && palette.size() <= 256, ErrorCode::InvalidInput,
            "write_png_indexed: palette must have 1..256 entries");
    require(ids.ids.size() == static_cast<size_t>(ids.height) * ids.width, ErrorCode::InvalidInput,
            "write_png_indexed: id buffer size mismatch");
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    require(f != nullptr, ErrorCode::Runtime, "cannot open for write: " + path.string());

    PngWriter ctx;
    if (setjmp(png_jmpbuf(ctx.png))) fail(ErrorCode::Runtime, "png write failed: " + path.string());
    png_init_io(ctx.png, f.get());
    png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(ids.width),
                 static_cast<png_uint_32>(ids.height), 8, PNG_COLOR_TYPE_PALETTE,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_color> colors(palette.size());
    for (size_t i = 0; i < palette.size(); ++i)
        colors[i] = {palette[i][0], palette[i][1], palette[i][2]};
    png_set_PLTE(ctx.png, ctx.info, colors.data(), static_cast<int>(colors.size()));
    png_write_info(ctx.png, ctx.info);

    std::vector<uint8_t> row(static_cast<size_t>(ids.width));
    for (int y = 0; y < ids.height; ++y) {
        for (int x = 0; x < ids.width; ++x) {
            const int id = ids.ids[static_cast<size_t>(y) * ids.width + x];
            require(id >= 0 && id < static_cast<int>(palette.size()), ErrorCode::InvalidInput,
                    "write_png_indexed: class id outside palette");
            row[static_cast<size_t>(x)] = static_cast<uint8_t>(id);
        }
        png_write_row(ctx.png, row.data());
    }
    png_write_end(ctx.png, nullptr);
}

metrics::ClassMap read_png_indexed(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    require(f != nullptr, ErrorCode::MissingInput, "cannot open png: " + path.string());
    PngReader ctx;
    if (setjmp(png_jmpbuf(ctx.png))) fail(ErrorCode::InvalidInput, "png read failed: " + path.string());
    png_init_io(ctx.png, f.get());
    png_read_info(ctx.png, ctx.info);

    require(png_get_color_type(ctx.png, ctx.info) == PNG_COLOR_TYPE_PALETTE,
            ErrorCode::InvalidInput, "expected paletted png: " + path.string());
    if (png_get_bit_depth(ctx.png, ctx.info) < 8) png_set_packing(ctx.png);

    metrics::ClassMap out;
    out.width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    out.height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    out.ids.resize(static_cast<size_t>(out.width) * out.height);

    std::vector<uint8_t> row(static_cast<size_t>(out.width));
    for (int y = 0; y < out.height; ++y) {
        png_read_row(ctx.png, row.data(), nullptr);
        for (int x = 0; x < out.width; ++x)
            out.ids[static_cast<size_t>(y) * out.width + x] = row[static_cast<size_t>(x)];
    }
    return out;
}

}  // namespace sonovis::data
