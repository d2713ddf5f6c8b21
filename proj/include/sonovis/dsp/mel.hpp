#pragma once

#include "sonovis/core/tensor.hpp"
#include "sonovis/dsp/audio.hpp"

namespace sonovis::dsp {

struct MelParams {
    int window_length = 2048;  // also the FFT size
    int hop_length = 256;
    int mel_bins = 256;
    int sample_rate = 22050;
    double power = 2.0;  // magnitude exponent before the filterbank (1 or 2)
    bool log_compress = true;  // log(1+x) after the filterbank
};

// N x T x W tensor of (log-)mel magnitudes plus the parameters that shaped it.
struct Spectrogram {
    Tensor values;
    MelParams params;

    int channels() const { return values.dim(0); }
    int frames() const { return values.dim(1); }
    int bins() const { return values.dim(2); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Center frequency (Hz) of triangular filter k out of `mel_bins` spanning
// 0 .. sample_rate/2.
double mel_filter_center_hz(int k, int mel_bins, int sample_rate);

// Triangular filter weights evaluated at the FFT bin frequencies;
// row k holds filter k over window_length/2+1 bins.
std::vector<std::vector<double>> mel_filterbank(const MelParams& params);

// Single-channel mel spectrogram: Hann-windowed frames fully inside the
// signal (T = floor((len-L)/H)+1, no padding), FFT size = window length,
// filterbank, then optional log(1+x). Output shape 1 x T x W.
Spectrogram mel_spectrogram(const std::vector<float>& samples, const MelParams& params);

// Per-channel mel of a clip, channels stacked along dim 0 (N x T x W).
Spectrogram mel_spectrogram_multichannel(const AudioClip& clip, const MelParams& params);

// Concatenates single-channel spectrograms along a new leading dimension.
// All inputs must agree on T, W and parameters.
Spectrogram stack_channels(const std::vector<Spectrogram>& specs);

}  // namespace sonovis::dsp
