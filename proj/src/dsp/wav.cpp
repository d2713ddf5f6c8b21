#include "sonovis/dsp/wav.hpp"

#include <cstring>
#include <fstream>

namespace sonovis::dsp {

namespace {

struct Reader {
    std::ifstream in;
    explicit Reader(const std::filesystem::path& p) : in(p, std::ios::binary) {}
    void bytes(void* dst, size_t n, const char* what) {
        in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        require(in.gcount() == static_cast<std::streamsize>(n), ErrorCode::InvalidInput,
                std::string("wav: truncated ") + what);
    }
    uint32_t u32(const char* what) {
        uint32_t v;
        bytes(&v, 4, what);
        return v;
    }
    uint16_t u16(const char* what) {
        uint16_t v;
        bytes(&v, 2, what);
        return v;
    }
};

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
    Reader r(path);
    require(r.in.good(), ErrorCode::MissingInput, "cannot open wav: " + path.string());

    char tag[4];
    r.bytes(tag, 4, "RIFF tag");
    require(std::memcmp(tag, "RIFF", 4) == 0, ErrorCode::InvalidInput, "wav: missing RIFF header");
    r.u32("riff size");
    r.bytes(tag, 4, "WAVE tag");
    require(std::memcmp(tag, "WAVE", 4) == 0, ErrorCode::InvalidInput, "wav: missing WAVE header");

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    bool have_fmt = false;

    while (true) {
        if (!r.in.read(tag, 4)) fail(ErrorCode::InvalidInput, "wav: no data chunk");
        uint32_t chunk_size = r.u32("chunk size");
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format = r.u16("format");
            channels = r.u16("channels");
            rate = r.u32("rate");
            r.u32("byte rate");
            r.u16("block align");
            bits = r.u16("bits");
            if (chunk_size > 16) r.in.seekg(chunk_size - 16, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            require(have_fmt, ErrorCode::InvalidInput, "wav: data chunk before fmt");
            require(channels >= 1 && channels <= 16, ErrorCode::InvalidInput,
                    "wav: unsupported channel count");
            bool pcm16 = format == 1 && bits == 16;
            bool f32 = format == 3 && bits == 32;
            require(pcm16 || f32, ErrorCode::InvalidInput,
                    "wav: only PCM 16-bit and float 32-bit supported");
            uint32_t bytes_per_sample = bits / 8;
            uint32_t frames = chunk_size / (channels * bytes_per_sample);
            AudioClip clip;
            clip.sample_rate = static_cast<int>(rate);
            clip.samples.assign(channels, std::vector<float>(frames));
            std::vector<char> raw(static_cast<size_t>(chunk_size));
            r.bytes(raw.data(), raw.size(), "sample data");
            for (uint32_t f = 0; f < frames; ++f) {
                for (uint16_t c = 0; c < channels; ++c) {
                    size_t off = (static_cast<size_t>(f) * channels + c) * bytes_per_sample;
                    if (pcm16) {
                        int16_t v;
                        std::memcpy(&v, raw.data() + off, 2);
                        clip.samples[c][f] = static_cast<float>(v) / 32768.0f;
                    } else {
                        float v;
                        std::memcpy(&v, raw.data() + off, 4);
                        clip.samples[c][f] = v;
                    }
                }
            }
            clip.validate();
            return clip;
        } else {
            r.in.seekg(chunk_size + (chunk_size & 1u), std::ios::cur);
        }
    }
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
    clip.validate();
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::Runtime, "cannot open for write: " + path.string());

    const uint16_t channels = static_cast<uint16_t>(clip.channels());
    const uint32_t frames = static_cast<uint32_t>(clip.length());
    const uint32_t data_size = frames * channels * 4;

    auto u32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };

    out.write("RIFF", 4);
    u32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(3);  // IEEE float
    u16(channels);
    u32(static_cast<uint32_t>(clip.sample_rate));
    u32(static_cast<uint32_t>(clip.sample_rate) * channels * 4);
    u16(channels * 4);
    u16(32);
    out.write("data", 4);
    u32(data_size);
    for (uint32_t f = 0; f < frames; ++f)
        for (uint16_t c = 0; c < channels; ++c)
            out.write(reinterpret_cast<const char*>(&clip.samples[c][f]), 4);
    require(out.good(), ErrorCode::Runtime, "wav write failed: " + path.string());
}

}  // namespace sonovis::dsp
