#pragma once

#include "sonovis/dsp/audio.hpp"

namespace sonovis::dsp {

// Band-limited windowed-sinc resampling. Equal rates return the clip
// unchanged; otherwise every channel is interpolated with a Hann-windowed
// sinc kernel whose cutoff tracks the lower Nyquist, with per-sample weight
// normalization so DC is preserved exactly.
AudioClip resample(const AudioClip& clip, int target_rate);

}  // namespace sonovis::dsp
