#pragma once

// Mixture generation x = g_L (n0 + g_S s0) with multi-noise augmentation,
// level jitter and file-level train/val/test splits.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hanr/wav.hpp"

namespace hanr {

enum class Split { kTrain, kVal, kTest };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct NoiseSegment {
  std::string id;
  std::int64_t offset_samples = 0;
};

struct MixManifest {
  std::string mixture_id;
  std::string speech_id;
  std::vector<NoiseSegment> noises;  // 1..4
  std::int64_t num_samples = 0;
  double target_snr_db = 0.0;
  double g_s = 1.0;  // linear
  double g_l_db = 0.0;
  Split split = Split::kTrain;
  std::uint64_t rng_seed = 0;
  bool peak_normalized = false;
  double peak_scale = 1.0;  // extra scale applied when the mix would clip

  void validate() const;
};

nlohmann::ordered_json to_json(const MixManifest& m);
MixManifest manifest_from_json(const nlohmann::json& j);

void write_manifests(const std::vector<MixManifest>& ms, const std::filesystem::path& path);
std::vector<MixManifest> read_manifests(const std::filesystem::path& path);

inline constexpr int kMaxNoises = 4;

// Sample-wise sum of offset segments of length `length`.
Signal build_noise_mixture(std::span<const Signal> noises,
                           std::span<const std::int64_t> offsets, std::size_t length);

double rms(std::span<const double> x);

// 10^(snr/20) * rms(n0) / rms(s0).
double compute_gs(std::span<const double> s0, std::span<const double> n0, double target_snr_db);

double snr_db(std::span<const double> s, std::span<const double> n);

struct MixedSignals {
  Signal x, s, n;
  bool peak_normalized = false;
  double peak_scale = 1.0;
};

// s = g_L g_S s0, n = g_L n0, x = s + n. If |x| would exceed 1, all three are
// scaled by a common factor and the flag is set.
MixedSignals mix(std::span<const double> s0, std::span<const double> n0,
                 double g_s, double g_l_db);
MixedSignals mix(std::span<const double> s0, std::span<const double> n0,
                 const MixManifest& m);

struct SplitRatios {
  double train = 0.8, val = 0.1, test = 0.1;
};

struct SplitAssignment {
  std::map<std::string, Split> speech;
  std::map<std::string, Split> noise;

  std::vector<std::string> speech_in(Split s) const;
  std::vector<std::string> noise_in(Split s) const;
};

// Partition at source-file level. Every split with a positive ratio gets at
// least one speech and one noise file, otherwise a DataError is thrown.
SplitAssignment split_corpus(const std::vector<std::string>& speech_ids,
                             const std::vector<std::string>& noise_ids,
                             const SplitRatios& ratios, std::uint64_t seed);

struct Corpus {
  std::map<std::string, Signal> speech;
  std::map<std::string, Signal> noise;

  std::vector<std::string> speech_ids() const;
  std::vector<std::string> noise_ids() const;
};

// Reads <dir>/speech/*.wav and <dir>/noise/*.wav (24 kHz mono); ids are the
// file stems.
Corpus load_corpus(const std::filesystem::path& dir, int sample_rate);

struct MixConfig {
  std::vector<double> snr_set_db{-10.0, -5.0, 0.0, 5.0, 10.0, 20.0};
  std::vector<double> level_set_db{-6.0, 0.0, 6.0};
  int mixtures_train = 64;
  int mixtures_val = 16;
  int mixtures_test = 16;
  SplitRatios ratios;
  std::uint64_t seed = 1;
};

// Draws manifests for every split: speech uniform from the split's files,
// 1..4 noises (uniform count) from the split's noise files, SNR and level
// uniform over the configured sets.
std::vector<MixManifest> generate_manifests(const Corpus& corpus, const SplitAssignment& split,
                                            const MixConfig& cfg);

// Regenerates the signals a manifest describes.
MixedSignals realize(const MixManifest& m, const Corpus& corpus);

}  // namespace hanr
