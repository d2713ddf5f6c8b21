#pragma once

#include <vector>

#include "sonovis/core/error.hpp"

namespace sonovis::dsp {

// Multi-channel audio, amplitudes in [-1, 1], equal-length channels.
struct AudioClip {
    std::vector<std::vector<float>> samples;  // [channel][frame]
    int sample_rate = 0;

    int channels() const { return static_cast<int>(samples.size()); }
    int64_t length() const { return samples.empty() ? 0 : static_cast<int64_t>(samples[0].size()); }
    double duration_seconds() const { return static_cast<double>(length()) / sample_rate; }

    void validate() const {
        require(!samples.empty(), ErrorCode::InvalidInput, "audio clip has no channels");
        require(sample_rate > 0, ErrorCode::InvalidInput, "audio clip sample rate must be positive");
        for (const auto& ch : samples)
            require(static_cast<int64_t>(ch.size()) == length(), ErrorCode::InvalidInput,
                    "audio clip channels have unequal lengths");
    }
};

}  // namespace sonovis::dsp
