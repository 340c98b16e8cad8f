#pragma once

#include <filesystem>
#include <vector>

namespace hanr {

// Mono audio, samples nominally in [-1, 1).
using Signal = std::vector<double>;

enum class WavEncoding { kPcm16, kFloat32 };

struct WavData {
  int sample_rate = 0;
  Signal samples;
};

// Reads a mono RIFF/WAVE file (16-bit PCM or 32-bit IEEE float).
// Throws DataError on malformed files and ConfigError on unsupported layouts.
WavData read_wav(const std::filesystem::path& path);

// Reads and checks the sample rate; no implicit resampling is ever done.
Signal read_wav_checked(const std::filesystem::path& path, int sample_rate);

void write_wav(const std::filesystem::path& path, const Signal& samples,
               int sample_rate, WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace hanr
