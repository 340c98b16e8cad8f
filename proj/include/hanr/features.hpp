#pragma once

// Log-power features over an asymmetric temporal context with buffer-local
// mean removal.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "hanr/filterbank.hpp"

namespace hanr {

inline constexpr double kPowerFloor = 1e-12;

struct ContextConfig {
  int tau1_frames = 200;  // look-back
  int tau2_frames = 2;    // lookahead
  int num_bands = kNumBands;

  int total() const { return tau1_frames + 1 + tau2_frames; }
  int feature_dim() const { return total() * num_bands + 2 * num_bands; }
  void validate() const;
};

// Normalized log-power context for one enhanced frame. logpow is stored
// time-major (oldest frame first), num_bands values per frame.
struct ContextWindow {
  int frames = 0;
  int num_bands = kNumBands;
  std::vector<double> logpow;
  std::vector<double> mu;
  std::vector<double> sigma;
  std::int64_t center_frame_index = 0;

  double at(int t, int f) const { return logpow[static_cast<std::size_t>(t) * num_bands + f]; }
};

using FeatureVector = std::vector<double>;

// ln(max(|X_f|^2, 1e-12)) over the num_bands modelled bins.
std::vector<double> log_power(const SubbandFrame& frame);

// Subtracts the per-bin mean of the buffer; sigma is the population standard
// deviation over the same buffer and is not used for scaling.
ContextWindow normalize(std::span<const double> raw, int frames, int num_bands);

// Normalized window (time-major), then mu, then sigma.
FeatureVector assemble_input(const ContextWindow& win);

// Ring buffer of the last tau1 + 1 + tau2 log-power frames.
class ContextBuffer {
 public:
  explicit ContextBuffer(const ContextConfig& cfg);

  // Returns the window centred on frame (index - tau2) once enough frames are
  // buffered. Frames must arrive with consecutive indices starting at 0.
  std::optional<ContextWindow> push(const SubbandFrame& frame);
  std::optional<ContextWindow> push(std::int64_t index, std::span<const double> logpow);

  const ContextConfig& config() const { return cfg_; }
  void reset();

 private:
  ContextConfig cfg_;
  std::vector<double> ring_;
  std::vector<double> scratch_;
  std::int64_t next_index_ = 0;
  int filled_ = 0;
  int head_ = 0;  // slot the next frame is written to
};

// Training dump: header "HADF", version, tau1, tau2, num_bands (u32 LE), then
// records of feature_dim + num_bands little-endian float32 values.
struct FeatureSet {
  ContextConfig context;
  std::vector<float> inputs;   // rows of feature_dim
  std::vector<float> targets;  // rows of num_bands

  std::size_t size() const;
  int input_dim() const { return context.feature_dim(); }
  int output_dim() const { return context.num_bands; }
  std::span<const float> input(std::size_t i) const;
  std::span<const float> target(std::size_t i) const;
  void append(std::span<const double> features, std::span<const double> gains);
  void append(std::span<const float> features, std::span<const float> gains);
};

inline constexpr std::uint32_t kFeatureFileVersion = 1;

void save_features(const FeatureSet& set, const std::filesystem::path& path);
FeatureSet load_features(const std::filesystem::path& path);

}  // namespace hanr
