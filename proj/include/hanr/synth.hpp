#pragma once

// Hermetic stand-in corpus: syllable-structured harmonic "speech" and a mix
// of stationary, modulated and impulsive noises, all at 24 kHz.

#include <cstdint>
#include <filesystem>

#include "hanr/dataset.hpp"

namespace hanr {

struct SynthCorpusConfig {
  int num_speech = 30;
  int num_noise = 30;
  double speech_seconds = 4.0;
  double noise_seconds = 8.0;
  std::uint64_t seed = 7;
};

Signal synth_speech(double seconds, std::uint64_t seed);
// kind selects the noise family (taken modulo the number of families).
Signal synth_noise(int kind, double seconds, std::uint64_t seed);
Signal white_noise(std::size_t n, std::uint64_t seed, double stddev = 1.0);

Corpus make_synthetic_corpus(const SynthCorpusConfig& cfg);
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace hanr
