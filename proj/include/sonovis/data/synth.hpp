#pragma once

#include <json.hpp>

#include <filesystem>

#include "sonovis/core/rng.hpp"
#include "sonovis/data/manifest.hpp"
#include "sonovis/data/scene.hpp"
#include "sonovis/dsp/audio.hpp"

namespace sonovis::data {

struct SynthConfig {
    int train_count = 192;
    int val_count = 24;
    int test_count = 48;
    int image_size = 64;
    int sample_rate = 22050;
    double clip_seconds = 1.0;
    int mic_count = 4;
    double mic_array_extent = 1.6;  // meters, mics on a line centered at the camera
    int min_objects = 1;
    int max_objects = 2;
    int num_classes = 4;  // sounding classes, ids 1..num_classes; 0 is background
    double min_distance = 2.0;
    double max_distance = 8.0;
    double background_depth = 12.0;
    double u_lo = 0.15, u_hi = 0.85;
    double v_lo = 0.30, v_hi = 0.70;
    double size_lo = 0.14, size_hi = 0.30;
    double snr_db = 30.0;
    double freq_lo = 200.0;  // class fundamentals, log-spaced
    double freq_hi = 4000.0;
    double fov_deg = 90.0;

    nlohmann::json to_json() const;
    static SynthConfig from_json(const nlohmann::json& j);
};

// Class fundamental frequency, log-spaced over [freq_lo, freq_hi].
double class_frequency(const SynthConfig& config, int class_id);

// Random scene drawn from the config's ranges.
Scene random_scene(const SynthConfig& config, RandomStream& rng);

// M-channel clip: each sounding object contributes a fundamental plus two
// harmonics at its class frequency, per-channel gain 1/r and delay r/343 m/s
// from source-to-mic geometry, plus white Gaussian noise at snr_db.
dsp::AudioClip synth_audio(const Scene& scene, const SynthConfig& config, RandomStream& rng);

// Writes wav/png ground truth plus manifest.jsonl under out_dir; fully
// deterministic per (config, seed). Returns the loaded-back manifest.
PairManifest synth_generate(const std::filesystem::path& out_dir, const SynthConfig& config,
                            uint64_t seed);

}  // namespace sonovis::data
