#pragma once

// Uniform 48-band weighted overlap-add filter bank at 24 kHz.
//
// Analysis: every hop of R samples the most recent L input samples are
// windowed with the analysis prototype, folded modulo N = 2 * num_bands and
// transformed with an N-point real DFT, giving num_bands + 1 bins (DC ..
// Nyquist, 250 Hz spacing). Synthesis inverts the DFT, applies the dual
// synthesis window and overlap-adds. Each synthesized hop is released on the
// same tick as the last input sample of the frame that completes it, so the
// cascade delay is L - 1 samples.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "hanr/dft.hpp"
#include "hanr/wav.hpp"

namespace hanr {

inline constexpr int kSampleRate = 24000;
inline constexpr int kNumBands = 48;
// Analysis + synthesis delay ceiling (6 ms) and full chain budget (8 ms).
inline constexpr int kFilterbankDelayLimit = 144;
inline constexpr int kLatencyBudget = 192;

enum class WindowKind { kSqrtHann, kCustomPrototype };

struct FilterbankConfig {
  int sample_rate_hz = kSampleRate;
  int num_bands = kNumBands;
  int hop_samples = 24;
  int window_len_samples = 96;
  WindowKind window_kind = WindowKind::kSqrtHann;
  // Analysis prototype when window_kind == kCustomPrototype.
  std::vector<double> custom_prototype;

  int dft_size() const { return 2 * num_bands; }
  double band_spacing_hz() const {
    return static_cast<double>(sample_rate_hz) / dft_size();
  }
  // Frames at stream start whose window still overlaps the zero padding.
  int warmup_frames() const { return window_len_samples / hop_samples; }

  // Structural checks (rates, band count, window/hop relation). Throws
  // ConfigError. Does not enforce the latency ceiling; see
  // check_latency_budget.
  void validate() const;
};

// One hop of analysis output: num_bands complex band signals plus the
// Nyquist bin, which is carried through untouched.
struct SubbandFrame {
  std::int64_t index = 0;
  std::vector<Complex> bins;

  int num_bands() const { return static_cast<int>(bins.size()) - 1; }
  Complex& operator[](std::size_t f) { return bins[f]; }
  const Complex& operator[](std::size_t f) const { return bins[f]; }
};

std::vector<double> analysis_window(const FilterbankConfig& cfg);
// Dual window satisfying sum_m w_a(n + mR) w_s(n + mR) = 1.
std::vector<double> synthesis_window(const FilterbankConfig& cfg);

// Streaming analysis, one frame per hop.
class Analyzer {
 public:
  explicit Analyzer(const FilterbankConfig& cfg);

  // hop.size() must equal hop_samples.
  SubbandFrame push(std::span<const double> hop);

  const FilterbankConfig& config() const { return cfg_; }
  void reset();

 private:
  FilterbankConfig cfg_;
  RealDft dft_;
  std::vector<double> window_;
  std::vector<double> history_;  // last L samples, oldest first
  std::vector<double> folded_;
  std::int64_t next_index_ = 0;
};

// Streaming synthesis, one hop of output per frame.
class Synthesizer {
 public:
  explicit Synthesizer(const FilterbankConfig& cfg);

  // Appends hop_samples output samples to out.
  void push(const SubbandFrame& frame, std::vector<double>& out);

  const FilterbankConfig& config() const { return cfg_; }
  void reset();

 private:
  FilterbankConfig cfg_;
  RealDft dft_;
  std::vector<double> window_;
  std::vector<double> time_;
  std::vector<double> accum_;    // overlap-add accumulator, L samples
  std::vector<double> pending_;  // R - 1 sample release delay
};

// Whole-signal helpers. analyze zero-pads the tail to a multiple of the hop.
std::vector<SubbandFrame> analyze(std::span<const double> pcm,
                                  const FilterbankConfig& cfg);
Signal synthesize(std::span<const SubbandFrame> frames,
                  const FilterbankConfig& cfg);

// Input-to-output delay of the analysis + synthesis cascade, measured as the
// argmax of the impulse response.
int group_delay(const FilterbankConfig& cfg);

// Throws ConfigError if the cascade delay exceeds 144 samples or the delay
// plus lookahead exceeds the 192-sample budget. Returns the total latency.
int check_latency_budget(const FilterbankConfig& cfg, int lookahead_frames);

}  // namespace hanr
