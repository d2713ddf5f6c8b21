#include "sonovis/dsp/resample.hpp"

#include <algorithm>
#include <cmath>

namespace sonovis::dsp {

namespace {

constexpr int kZeroCrossings = 16;
constexpr double kPi = 3.14159265358979323846;

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    double v = kPi * x;
    return std::sin(v) / v;
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
    clip.validate();
    require(clip.length() > 0, ErrorCode::InvalidInput, "resample: empty clip");
    require(target_rate > 0, ErrorCode::InvalidInput, "resample: target rate must be positive");
    if (target_rate == clip.sample_rate) return clip;

    const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
    const int64_t in_len = clip.length();
    const int64_t out_len = std::max<int64_t>(1, std::llround(in_len * ratio));

    // Cutoff in cycles per input sample; widen the kernel when decimating.
    const double cutoff = 0.5 * std::min(1.0, ratio);
    const double half_width = kZeroCrossings / (2.0 * cutoff);

    AudioClip out;
    out.sample_rate = target_rate;
    out.samples.assign(clip.samples.size(), std::vector<float>(static_cast<size_t>(out_len)));

    for (size_t c = 0; c < clip.samples.size(); ++c) {
        const std::vector<float>& x = clip.samples[c];
        for (int64_t n = 0; n < out_len; ++n) {
            const double center = static_cast<double>(n) / ratio;
            const int64_t j0 = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(center - half_width)));
            const int64_t j1 = std::min<int64_t>(in_len - 1, static_cast<int64_t>(std::floor(center + half_width)));
            double acc = 0.0, norm = 0.0;
            for (int64_t j = j0; j <= j1; ++j) {
                const double d = j - center;
                const double w = 0.5 + 0.5 * std::cos(kPi * d / half_width);
                const double k = 2.0 * cutoff * sinc(2.0 * cutoff * d) * w;
                acc += k * x[static_cast<size_t>(j)];
                norm += k;
            }
            out.samples[c][static_cast<size_t>(n)] =
                norm != 0.0 ? static_cast<float>(acc / norm) : 0.0f;
        }
    }
    return out;
}

}  // namespace sonovis::dsp
