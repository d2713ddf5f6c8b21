#include "sonovis/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sonovis/data/png_io.hpp"
#include "sonovis/dsp/wav.hpp"

namespace sonovis::data {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedOfSound = 343.0;  // m/s
constexpr double kHarmonicAmps[3] = {0.5, 0.25, 0.125};

Palette make_palette(int num_classes) {
    Palette palette;
    palette.push_back({40, 40, 40});  // background
    for (int c = 1; c <= num_classes; ++c) {
        const double hue = 360.0 * (c - 1) / num_classes;
        const double h = hue / 60.0;
        const double f = h - std::floor(h);
        const auto scale = [](double x) { return static_cast<uint8_t>(std::lround(255 * x)); };
        switch (static_cast<int>(h) % 6) {
            case 0: palette.push_back({255, scale(f), 0}); break;
            case 1: palette.push_back({scale(1 - f), 255, 0}); break;
            case 2: palette.push_back({0, 255, scale(f)}); break;
            case 3: palette.push_back({0, scale(1 - f), 255}); break;
            case 4: palette.push_back({scale(f), 0, 255}); break;
            default: palette.push_back({255, 0, scale(1 - f)}); break;
        }
    }
    return palette;
}

}  // namespace

json SynthConfig::to_json() const {
    return json{{"train_count", train_count},
                {"val_count", val_count},
                {"test_count", test_count},
                {"image_size", image_size},
                {"sample_rate", sample_rate},
                {"clip_seconds", clip_seconds},
                {"mic_count", mic_count},
                {"mic_array_extent", mic_array_extent},
                {"min_objects", min_objects},
                {"max_objects", max_objects},
                {"num_classes", num_classes},
                {"min_distance", min_distance},
                {"max_distance", max_distance},
                {"background_depth", background_depth},
                {"u_lo", u_lo},
                {"u_hi", u_hi},
                {"v_lo", v_lo},
                {"v_hi", v_hi},
                {"size_lo", size_lo},
                {"size_hi", size_hi},
                {"snr_db", snr_db},
                {"freq_lo", freq_lo},
                {"freq_hi", freq_hi},
                {"fov_deg", fov_deg}};
}

SynthConfig SynthConfig::from_json(const json& j) {
    SynthConfig c;
    c.train_count = j.value("train_count", c.train_count);
    c.val_count = j.value("val_count", c.val_count);
    c.test_count = j.value("test_count", c.test_count);
    c.image_size = j.value("image_size", c.image_size);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.clip_seconds = j.value("clip_seconds", c.clip_seconds);
    c.mic_count = j.value("mic_count", c.mic_count);
    c.mic_array_extent = j.value("mic_array_extent", c.mic_array_extent);
    c.min_objects = j.value("min_objects", c.min_objects);
    c.max_objects = j.value("max_objects", c.max_objects);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.min_distance = j.value("min_distance", c.min_distance);
    c.max_distance = j.value("max_distance", c.max_distance);
    c.background_depth = j.value("background_depth", c.background_depth);
    c.u_lo = j.value("u_lo", c.u_lo);
    c.u_hi = j.value("u_hi", c.u_hi);
    c.v_lo = j.value("v_lo", c.v_lo);
    c.v_hi = j.value("v_hi", c.v_hi);
    c.size_lo = j.value("size_lo", c.size_lo);
    c.size_hi = j.value("size_hi", c.size_hi);
    c.snr_db = j.value("snr_db", c.snr_db);
    c.freq_lo = j.value("freq_lo", c.freq_lo);
    c.freq_hi = j.value("freq_hi", c.freq_hi);
    c.fov_deg = j.value("fov_deg", c.fov_deg);
    return c;
}

double class_frequency(const SynthConfig& config, int class_id) {
    require(class_id >= 1 && class_id <= config.num_classes, ErrorCode::InvalidInput,
            "class_frequency: class id out of range");
    if (config.num_classes == 1) return config.freq_lo;
    const double t = static_cast<double>(class_id - 1) / (config.num_classes - 1);
    return config.freq_lo * std::pow(config.freq_hi / config.freq_lo, t);
}

Scene random_scene(const SynthConfig& config, RandomStream& rng) {
    require(config.min_objects >= 1 && config.max_objects >= config.min_objects,
            ErrorCode::InvalidInput, "synth: bad object count range");
    require(config.num_classes >= 1, ErrorCode::InvalidInput, "synth: need at least one class");
    require(config.min_distance > 0 && config.max_distance > config.min_distance,
            ErrorCode::InvalidInput, "synth: bad distance range");
    require(config.background_depth > config.max_distance, ErrorCode::InvalidInput,
            "synth: background must be farther than any object");
    require(config.mic_count >= 2, ErrorCode::InvalidInput, "synth: need at least two mics");

    Scene scene;
    scene.background_depth = config.background_depth;
    scene.fov_deg = config.fov_deg;
    for (int m = 0; m < config.mic_count; ++m) {
        const double x = config.mic_array_extent *
                         (static_cast<double>(m) / (config.mic_count - 1) - 0.5);
        scene.mics.push_back({x, 0.0, 0.0});
    }
    const int count = rng.uniform_int(config.min_objects, config.max_objects);
    for (int i = 0; i < count; ++i) {
        SceneObject obj;
        obj.class_id = rng.uniform_int(1, config.num_classes);
        obj.shape = rng.uniform() < 0.5 ? ObjectShape::Rect : ObjectShape::Disc;
        obj.u = rng.uniform(config.u_lo, config.u_hi);
        obj.v = rng.uniform(config.v_lo, config.v_hi);
        obj.size = rng.uniform(config.size_lo, config.size_hi);
        obj.distance = rng.uniform(config.min_distance, config.max_distance);
        obj.emits_sound = true;
        obj.frequency = class_frequency(config, obj.class_id);
        scene.objects.push_back(obj);
    }
    return scene;
}

dsp::AudioClip synth_audio(const Scene& scene, const SynthConfig& config, RandomStream& rng) {
    scene.validate();
    const int channels = static_cast<int>(scene.mics.size());
    const int64_t frames = std::llround(config.clip_seconds * config.sample_rate);

    dsp::AudioClip clip;
    clip.sample_rate = config.sample_rate;
    clip.samples.assign(static_cast<size_t>(channels),
                        std::vector<float>(static_cast<size_t>(frames), 0.0f));

    // One phase per (object, harmonic), shared across channels so the
    // inter-channel structure comes from geometry alone.
    std::vector<std::array<double, 3>> phases;
    for (const auto& obj : scene.objects) {
        (void)obj;
        phases.push_back({rng.uniform(0.0, 2.0 * kPi), rng.uniform(0.0, 2.0 * kPi),
                          rng.uniform(0.0, 2.0 * kPi)});
    }

    for (int m = 0; m < channels; ++m) {
        std::vector<float>& ch = clip.samples[static_cast<size_t>(m)];
        double signal_power = 0.0;
        for (size_t o = 0; o < scene.objects.size(); ++o) {
            const SceneObject& obj = scene.objects[o];
            if (!obj.emits_sound) continue;
            const auto pos = scene.object_position(obj);
            const auto& mic = scene.mics[static_cast<size_t>(m)];
            const double dx = pos[0] - mic[0], dy = pos[1] - mic[1], dz = pos[2] - mic[2];
            const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
            const double gain = 1.0 / std::max(r, 0.1);
            const double delay = r / kSpeedOfSound;
            for (int h = 0; h < 3; ++h) {
                const double w = 2.0 * kPi * obj.frequency * (h + 1);
                const double amp = gain * kHarmonicAmps[h];
                const double phase = phases[o][static_cast<size_t>(h)] - w * delay;
                for (int64_t t = 0; t < frames; ++t) {
                    const double time = static_cast<double>(t) / config.sample_rate;
                    ch[static_cast<size_t>(t)] += static_cast<float>(amp * std::sin(w * time + phase));
                }
                signal_power += 0.5 * amp * amp;
            }
        }
        const double noise_sigma = signal_power > 0.0
                                       ? std::sqrt(signal_power / std::pow(10.0, config.snr_db / 10.0))
                                       : 1e-4;
        for (int64_t t = 0; t < frames; ++t) {
            double v = ch[static_cast<size_t>(t)] + noise_sigma * rng.normal();
            ch[static_cast<size_t>(t)] = static_cast<float>(std::clamp(v, -1.0, 1.0));
        }
    }
    return clip;
}

PairManifest synth_generate(const fs::path& out_dir, const SynthConfig& config, uint64_t seed) {
    fs::create_directories(out_dir / "audio");
    fs::create_directories(out_dir / "depth");
    fs::create_directories(out_dir / "seg");

    PairManifest manifest;
    manifest.root = out_dir;
    manifest.depth_min = config.min_distance;
    manifest.depth_max = config.background_depth;
    manifest.audio_channels = config.mic_count;
    manifest.image_size = config.image_size;

    const Palette palette = make_palette(config.num_classes);
    manifest.classes.push_back({0, "background", palette[0]});
    for (int c = 1; c <= config.num_classes; ++c)
        manifest.classes.push_back({c, "class" + std::to_string(c), palette[static_cast<size_t>(c)]});

    const int total = config.train_count + config.val_count + config.test_count;
    for (int i = 0; i < total; ++i) {
        RandomStream rng(make_stream(seed, static_cast<uint64_t>(i)));
        const Scene scene = random_scene(config, rng);
        const Tensor depth_m = render_depth(scene, config.image_size);
        const metrics::ClassMap seg = render_seg(scene, config.image_size);
        const dsp::AudioClip audio = synth_audio(scene, config, rng);

        Tensor depth01 = depth_m;
        for (auto& v : depth01.data)
            v = static_cast<float>(manifest.normalize_depth(static_cast<double>(v)));

        char name[32];
        std::snprintf(name, sizeof(name), "s%05d", i);
        const std::string audio_rel = std::string("audio/") + name + ".wav";
        const std::string depth_rel = std::string("depth/") + name + ".png";
        const std::string seg_rel = std::string("seg/") + name + ".png";
        dsp::write_wav(out_dir / audio_rel, audio);
        write_png_gray16(out_dir / depth_rel, depth01);
        write_png_indexed(out_dir / seg_rel, seg, palette);

        Split split = i < config.train_count              ? Split::Train
                      : i < config.train_count + config.val_count ? Split::Val
                                                                  : Split::Test;
        manifest.entries.push_back({audio_rel, depth_rel, Modality::Depth, split});
        manifest.entries.push_back({audio_rel, seg_rel, Modality::Segmentation, split});
    }

    save_manifest(out_dir / "manifest.jsonl", manifest);
    {
        std::ofstream cfg(out_dir / "synth-config.json");
        json j = config.to_json();
        j["seed"] = seed;
        cfg << j.dump(2) << "\n";
    }
    return load_manifest(out_dir / "manifest.jsonl");
}

}  // namespace sonovis::data
