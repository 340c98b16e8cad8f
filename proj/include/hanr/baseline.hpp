#pragma once

// Classical comparison systems: a recursive minimum-tracking noise estimator
// (baseline) and a deliberately mistuned short-window minimum-statistics
// estimator (anchor). Both drive a power-subtraction Wiener rule limited to
// the same maximum attenuation.

#include <deque>
#include <span>
#include <vector>

#include "hanr/filterbank.hpp"
#include "hanr/wiener.hpp"

namespace hanr {

struct MinTrackConfig {
  double alpha = 0.85;           // first-order power smoothing
  double inc_per_frame = 1.0012; // maximum rise of the estimate per frame
  // Multiplier applied to the tracked minimum before the gain rule; on
  // stationary noise the minimum of the smoothed filter bank power sits near
  // 0.3 of the mean.
  double bias_compensation = 4.0;
  double max_atten_db = kDefaultMaxAttenDb;

  // Rise factor for a given slope in dB/s at the filter bank frame rate.
  static double inc_from_db_per_s(double db_per_s, double frames_per_s = 1000.0);
  double inc_db_per_s(double frames_per_s = 1000.0) const;
  void validate() const;
};

struct MinTrackState {
  std::vector<double> smoothed_power;
  std::vector<double> noise_estimate;
  bool initialized = false;
};

// One tracker step; returns the updated (uncompensated) noise PSD.
const std::vector<double>& min_track_update(MinTrackState& state, const SubbandFrame& x,
                                            const MinTrackConfig& cfg);

// max(1 - noise / max(power, eps), 0) followed by the attenuation clamp.
GainVector wiener_rule_gain(std::span<const double> power, std::span<const double> noise_psd,
                            double max_atten_db = kDefaultMaxAttenDb);

// Rule evaluated on the instantaneous power |X|^2.
GainVector baseline_gain(const SubbandFrame& x, std::span<const double> noise_psd,
                         double max_atten_db = kDefaultMaxAttenDb);

// Streaming baseline: tracker plus gain rule on the smoothed power.
class MinTrackSuppressor {
 public:
  explicit MinTrackSuppressor(const MinTrackConfig& cfg = {});
  GainVector process(const SubbandFrame& x);
  const MinTrackState& state() const { return state_; }

 private:
  MinTrackConfig cfg_;
  MinTrackState state_;
  std::vector<double> compensated_;
};

struct AnchorConfig {
  int window_frames = 24;  // minimum search window, far shorter than speech events
  double alpha = 0.96;     // smoothing memory longer than the search window
  double max_atten_db = kDefaultMaxAttenDb;
  void validate() const;
};

// Short-window minimum statistics without bias compensation.
class MinStatsAnchor {
 public:
  explicit MinStatsAnchor(const AnchorConfig& cfg = {});
  GainVector process(const SubbandFrame& x);
  const std::vector<double>& noise_estimate() const { return noise_; }

 private:
  AnchorConfig cfg_;
  std::vector<double> smoothed_;
  std::vector<double> noise_;
  std::vector<std::deque<std::pair<std::int64_t, double>>> minima_;  // monotone queues
  std::int64_t t_ = 0;
};

std::vector<GainVector> baseline_gains(std::span<const SubbandFrame> frames,
                                       const MinTrackConfig& cfg = {});
std::vector<GainVector> anchor_gain(std::span<const SubbandFrame> frames,
                                    const AnchorConfig& cfg = {});

}  // namespace hanr
