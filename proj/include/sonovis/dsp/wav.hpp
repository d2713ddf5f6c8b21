#pragma once

#include <filesystem>

#include "sonovis/dsp/audio.hpp"

namespace sonovis::dsp {

// RIFF/WAVE, PCM 16-bit or IEEE float 32-bit, 1-16 channels.
AudioClip read_wav(const std::filesystem::path& path);

// Written as 32-bit float so synthetic audio round-trips losslessly.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace sonovis::dsp
