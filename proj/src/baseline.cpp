#include "hanr/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "hanr/error.hpp"
#include "hanr/features.hpp"

namespace hanr {

double MinTrackConfig::inc_from_db_per_s(double db_per_s, double frames_per_s) {
  return std::pow(10.0, db_per_s / (10.0 * frames_per_s));
}

double MinTrackConfig::inc_db_per_s(double frames_per_s) const {
  return 10.0 * std::log10(inc_per_frame) * frames_per_s;
}

void MinTrackConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in [0, 1)");
  if (!(inc_per_frame >= 1.0)) throw ConfigError("rise factor must be >= 1");
  if (!(bias_compensation > 0.0)) throw ConfigError("bias compensation must be positive");
  gain_floor(max_atten_db);
}

void AnchorConfig::validate() const {
  if (window_frames < 1) throw ConfigError("anchor window must be >= 1 frame");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("anchor alpha must lie in [0, 1)");
  gain_floor(max_atten_db);
}

const std::vector<double>& min_track_update(MinTrackState& state, const SubbandFrame& x,
                                            const MinTrackConfig& cfg) {
  const int bands = x.num_bands();
  if (!state.initialized) {
    state.smoothed_power.resize(bands);
    for (int f = 0; f < bands; ++f)
      state.smoothed_power[f] = std::max(std::norm(x.bins[f]), kPowerFloor);
    state.noise_estimate = state.smoothed_power;
    state.initialized = true;
    return state.noise_estimate;
  }
  if (static_cast<int>(state.smoothed_power.size()) != bands)
    throw ConfigError("tracker band count changed mid-stream");
  for (int f = 0; f < bands; ++f) {
    double& s = state.smoothed_power[f];
    s = std::max(cfg.alpha * s + (1.0 - cfg.alpha) * std::norm(x.bins[f]), kPowerFloor);
    double& n = state.noise_estimate[f];
    n = std::max(std::min(s, n * cfg.inc_per_frame), kPowerFloor);
  }
  return state.noise_estimate;
}

GainVector wiener_rule_gain(std::span<const double> power, std::span<const double> noise_psd,
                            double max_atten_db) {
  if (power.size() != noise_psd.size()) throw ConfigError("noise PSD length mismatch");
  GainVector g(power.size());
  for (std::size_t f = 0; f < g.size(); ++f)
    g[f] = std::max(1.0 - noise_psd[f] / std::max(power[f], kPowerFloor), 0.0);
  return clamp_gain(g, max_atten_db);
}

GainVector baseline_gain(const SubbandFrame& x, std::span<const double> noise_psd,
                         double max_atten_db) {
  std::vector<double> power(x.num_bands());
  for (std::size_t f = 0; f < power.size(); ++f) power[f] = std::norm(x.bins[f]);
  return wiener_rule_gain(power, noise_psd, max_atten_db);
}

MinTrackSuppressor::MinTrackSuppressor(const MinTrackConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
}

GainVector MinTrackSuppressor::process(const SubbandFrame& x) {
  const auto& noise = min_track_update(state_, x, cfg_);
  compensated_.resize(noise.size());
  for (std::size_t f = 0; f < noise.size(); ++f)
    compensated_[f] = cfg_.bias_compensation * noise[f];
  return wiener_rule_gain(state_.smoothed_power, compensated_, cfg_.max_atten_db);
}

MinStatsAnchor::MinStatsAnchor(const AnchorConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

GainVector MinStatsAnchor::process(const SubbandFrame& x) {
  const int bands = x.num_bands();
  if (smoothed_.empty()) {
    smoothed_.resize(bands);
    noise_.resize(bands);
    minima_.resize(bands);
    for (int f = 0; f < bands; ++f) smoothed_[f] = std::max(std::norm(x.bins[f]), kPowerFloor);
  } else {
    for (int f = 0; f < bands; ++f)
      smoothed_[f] = std::max(cfg_.alpha * smoothed_[f] + (1.0 - cfg_.alpha) * std::norm(x.bins[f]),
                              kPowerFloor);
  }
  for (int f = 0; f < bands; ++f) {
    auto& q = minima_[f];
    while (!q.empty() && q.back().second >= smoothed_[f]) q.pop_back();
    q.emplace_back(t_, smoothed_[f]);
    while (q.front().first <= t_ - cfg_.window_frames) q.pop_front();
    noise_[f] = q.front().second;
  }
  ++t_;
  return wiener_rule_gain(smoothed_, noise_, cfg_.max_atten_db);
}

std::vector<GainVector> baseline_gains(std::span<const SubbandFrame> frames,
                                       const MinTrackConfig& cfg) {
  MinTrackSuppressor sup(cfg);
  std::vector<GainVector> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(sup.process(f));
  return out;
}

std::vector<GainVector> anchor_gain(std::span<const SubbandFrame> frames,
                                    const AnchorConfig& cfg) {
  MinStatsAnchor anchor(cfg);
  std::vector<GainVector> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(anchor.process(f));
  return out;
}

}  // namespace hanr
