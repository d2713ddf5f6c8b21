#include "sonovis/dsp/mel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace sonovis::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// The FFTW planner is not thread-safe; executions on private buffers are.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class RealFft {
public:
    explicit RealFft(int n) : n_(n) {
        in_ = fftw_alloc_real(static_cast<size_t>(n));
        out_ = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
    }
    ~RealFft() {
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            fftw_destroy_plan(plan_);
        }
        fftw_free(in_);
        fftw_free(out_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    double* input() { return in_; }
    // Magnitudes of bins 0..n/2.
    void execute(std::vector<double>& mags) {
        fftw_execute(plan_);
        mags.resize(static_cast<size_t>(n_ / 2 + 1));
        for (int b = 0; b <= n_ / 2; ++b)
            mags[static_cast<size_t>(b)] = std::hypot(out_[b][0], out_[b][1]);
    }

private:
    int n_;
    double* in_;
    fftw_complex* out_;
    fftw_plan plan_;
};

void check_params(const MelParams& p) {
    require(p.window_length >= 2, ErrorCode::InvalidInput, "mel: window length too small");
    require(p.hop_length >= 1, ErrorCode::InvalidInput, "mel: hop length must be positive");
    require(p.mel_bins >= 1, ErrorCode::InvalidInput, "mel: need at least one mel bin");
    require(p.sample_rate > 0, ErrorCode::InvalidInput, "mel: sample rate must be positive");
    require(p.power == 1.0 || p.power == 2.0, ErrorCode::InvalidInput,
            "mel: power must be 1 (magnitude) or 2 (power)");
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

double mel_filter_center_hz(int k, int mel_bins, int sample_rate) {
    const double mel_max = hz_to_mel(sample_rate / 2.0);
    const double step = mel_max / (mel_bins + 1);
    return mel_to_hz((k + 1) * step);
}

std::vector<std::vector<double>> mel_filterbank(const MelParams& p) {
    check_params(p);
    const int n_bins = p.window_length / 2 + 1;
    const double mel_max = hz_to_mel(p.sample_rate / 2.0);
    const double step = mel_max / (p.mel_bins + 1);

    std::vector<std::vector<double>> bank(static_cast<size_t>(p.mel_bins),
                                          std::vector<double>(static_cast<size_t>(n_bins), 0.0));
    for (int k = 0; k < p.mel_bins; ++k) {
        const double lo = mel_to_hz(k * step);
        const double mid = mel_to_hz((k + 1) * step);
        const double hi = mel_to_hz((k + 2) * step);
        for (int b = 0; b < n_bins; ++b) {
            const double f = static_cast<double>(b) * p.sample_rate / p.window_length;
            double w = 0.0;
            if (f > lo && f < mid)
                w = (f - lo) / (mid - lo);
            else if (f >= mid && f < hi)
                w = (hi - f) / (hi - mid);
            bank[static_cast<size_t>(k)][static_cast<size_t>(b)] = w;
        }
    }
    return bank;
}

Spectrogram mel_spectrogram(const std::vector<float>& samples, const MelParams& p) {
    check_params(p);
    const int64_t len = static_cast<int64_t>(samples.size());
    require(len >= p.window_length, ErrorCode::InvalidInput,
            "mel: segment shorter than the analysis window");

    const int frames = static_cast<int>((len - p.window_length) / p.hop_length) + 1;
    const auto bank = mel_filterbank(p);

    // Periodic Hann.
    std::vector<double> window(static_cast<size_t>(p.window_length));
    for (int i = 0; i < p.window_length; ++i)
        window[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / p.window_length);

    RealFft fft(p.window_length);
    std::vector<double> mags;

    Spectrogram spec;
    spec.params = p;
    spec.values = Tensor({1, frames, p.mel_bins});
    for (int t = 0; t < frames; ++t) {
        const int64_t start = static_cast<int64_t>(t) * p.hop_length;
        double* in = fft.input();
        for (int i = 0; i < p.window_length; ++i)
            in[i] = window[static_cast<size_t>(i)] * samples[static_cast<size_t>(start + i)];
        fft.execute(mags);
        if (p.power == 2.0)
            for (double& m : mags) m *= m;
        for (int k = 0; k < p.mel_bins; ++k) {
            const auto& filt = bank[static_cast<size_t>(k)];
            double acc = 0.0;
            for (size_t b = 0; b < mags.size(); ++b) acc += filt[b] * mags[b];
            spec.values.at3(0, t, k) =
                static_cast<float>(p.log_compress ? std::log1p(acc) : acc);
        }
    }
    check_finite(spec.values, "mel_spectrogram");
    return spec;
}

Spectrogram mel_spectrogram_multichannel(const AudioClip& clip, const MelParams& p) {
    clip.validate();
    std::vector<Spectrogram> per_channel;
    per_channel.reserve(clip.samples.size());
    MelParams params = p;
    params.sample_rate = clip.sample_rate;
    for (const auto& ch : clip.samples) per_channel.push_back(mel_spectrogram(ch, params));
    return stack_channels(per_channel);
}

Spectrogram stack_channels(const std::vector<Spectrogram>& specs) {
    require(!specs.empty(), ErrorCode::InvalidInput, "stack_channels: empty input list");
    const Spectrogram& first = specs.front();
    for (const auto& s : specs) {
        require(s.values.dim(0) == 1, ErrorCode::InvalidInput,
                "stack_channels: inputs must be single channel");
        require(s.frames() == first.frames() && s.bins() == first.bins(),
                ErrorCode::InvalidInput, "stack_channels: shape mismatch");
        require(s.params.window_length == first.params.window_length &&
                    s.params.hop_length == first.params.hop_length &&
                    s.params.sample_rate == first.params.sample_rate,
                ErrorCode::InvalidInput, "stack_channels: parameter mismatch");
    }
    Spectrogram out;
    out.params = first.params;
    out.values = Tensor({static_cast<int>(specs.size()), first.frames(), first.bins()});
    float* dst = out.values.data.data();
    for (const auto& s : specs) {
        std::copy(s.values.data.begin(), s.values.data.end(), dst);
        dst += s.values.numel();
    }
    return out;
}

}  // namespace sonovis::dsp
