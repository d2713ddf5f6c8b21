#pragma once

#include "sonovis/core/image.hpp"
#include "sonovis/dsp/mel.hpp"
#include "sonovis/dsp/resample.hpp"

namespace sonovis::dsp {

// Consecutive non-overlapping windows of round(window_seconds * rate)
// samples; a trailing remainder shorter than one window is dropped.
std::vector<AudioClip> segment(const AudioClip& clip, double window_seconds);

struct PipelineConfig {
    int target_rate = 22050;
    double window_seconds = 1.0;
    MelParams mel;          // sample_rate is overwritten with target_rate
    int output_size = 128;  // square spatial size after the bilinear resize
};

// resample -> segment -> per-channel mel -> stack -> bilinear resize.
// One N x size x size tensor per full window.
std::vector<Tensor> spectrogram_pipeline(const AudioClip& clip, const PipelineConfig& config);

}  // namespace sonovis::dsp
