#include "sonovis/dsp/pipeline.hpp"

#include <cmath>

namespace sonovis::dsp {

std::vector<AudioClip> segment(const AudioClip& clip, double window_seconds) {
    clip.validate();
    require(window_seconds > 0.0, ErrorCode::InvalidInput, "segment: window must be positive");
    const int64_t window = std::llround(window_seconds * clip.sample_rate);
    require(window > 0, ErrorCode::InvalidInput, "segment: window rounds to zero samples");

    const int64_t count = clip.length() / window;
    std::vector<AudioClip> out;
    out.reserve(static_cast<size_t>(count));
    for (int64_t w = 0; w < count; ++w) {
        AudioClip seg;
        seg.sample_rate = clip.sample_rate;
        seg.samples.reserve(clip.samples.size());
        for (const auto& ch : clip.samples)
            seg.samples.emplace_back(ch.begin() + w * window, ch.begin() + (w + 1) * window);
        out.push_back(std::move(seg));
    }
    return out;
}

std::vector<Tensor> spectrogram_pipeline(const AudioClip& clip, const PipelineConfig& config) {
    require(config.output_size > 0, ErrorCode::InvalidInput, "pipeline: output size must be positive");
    AudioClip resampled = resample(clip, config.target_rate);
    std::vector<AudioClip> windows = segment(resampled, config.window_seconds);

    MelParams mel = config.mel;
    mel.sample_rate = config.target_rate;

    std::vector<Tensor> out;
    out.reserve(windows.size());
    for (const AudioClip& w : windows) {
        Spectrogram spec = mel_spectrogram_multichannel(w, mel);
        out.push_back(resize_bilinear(spec.values, config.output_size, config.output_size));
    }
    return out;
}

}  // namespace sonovis::dsp
