#pragma once

// Objective measures: STOI / delta-STOI and shadow-filtered noise reduction
// (NR) and speech distortion (SD).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hanr/filterbank.hpp"
#include "hanr/wiener.hpp"

namespace hanr {

// Short-time objective intelligibility of `degraded` against `clean`, both at
// sample_rate. Throws DataError when fewer than 30 analysis frames survive
// silence removal or the reference is silent. Result is clipped to [0, 1].
double stoi(std::span<const double> clean, std::span<const double> degraded,
            int sample_rate = kSampleRate);

double delta_stoi(std::span<const double> clean, std::span<const double> noisy,
                  std::span<const double> enhanced, int sample_rate = kSampleRate);

// Per-frame gains a system applied to the noisy mixture, keyed by the
// analysis frame index they were applied to.
struct GainTrace {
  std::vector<std::int64_t> frame_index;
  std::vector<GainVector> gains;

  std::size_t size() const { return gains.size(); }
  void push(std::int64_t k, GainVector g) {
    frame_index.push_back(k);
    gains.push_back(std::move(g));
  }
};

// "HAGT", version, num_bands, count (u32 LE), then count records of
// (u32 frame index, num_bands float32).
void save_gain_trace(const GainTrace& trace, const std::filesystem::path& path);
GainTrace load_gain_trace(const std::filesystem::path& path);

inline constexpr double kSdFloorDb = -100.0;

struct NrSd {
  double nr_db = 0.0;
  double sd_db = kSdFloorDb;
};

// Applies the gain trace to analyze(s) and analyze(n) and pools over every
// traced frame with index >= skip_frames and over the modelled bands:
//   NR = 10 log10(sum |N|^2 / sum |G N|^2)
//   SD = 10 log10(sum |S - G S|^2 / sum |S|^2)   (floored at -100 dB)
// More negative SD means less speech distortion.
NrSd nr_sd(std::span<const double> s, std::span<const double> n, const GainTrace& trace,
           const FilterbankConfig& fb, std::int64_t skip_frames = 0);
NrSd nr_sd(std::span<const SubbandFrame> s_frames, std::span<const SubbandFrame> n_frames,
           const GainTrace& trace, std::int64_t skip_frames = 0);

struct EvalRecord {
  std::string mixture_id;
  double snr_db = 0.0;
  std::string system;
  double stoi = 0.0;
  double delta_stoi = 0.0;
  double nr_db = 0.0;
  double sd_db = 0.0;
};

void write_eval_csv(const std::vector<EvalRecord>& records, const std::filesystem::path& path);

struct Quartiles {
  double q1 = 0.0, median = 0.0, q3 = 0.0;
};

// Linear-interpolation quantiles (type 7).
Quartiles quartiles(std::vector<double> v);

struct SummaryRow {
  std::string system;
  double snr_db = 0.0;
  std::size_t count = 0;
  Quartiles stoi, delta_stoi, nr_db, sd_db;
};

// Groups by (system, SNR) in first-seen system order and ascending SNR.
std::vector<SummaryRow> summarize(const std::vector<EvalRecord>& records);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

}  // namespace hanr
