#include "hanr/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hanr/error.hpp"

namespace hanr {

void FilterbankConfig::validate() const {
  if (sample_rate_hz != kSampleRate)
    throw ConfigError("filter bank runs at " + std::to_string(kSampleRate) +
                      " Hz, got " + std::to_string(sample_rate_hz));
  if (num_bands != kNumBands)
    throw ConfigError("filter bank has " + std::to_string(kNumBands) +
                      " bands, got " + std::to_string(num_bands));
  if (hop_samples <= 0 || window_len_samples <= 0)
    throw ConfigError("hop and window length must be positive");
  if (window_len_samples % hop_samples != 0)
    throw ConfigError("window length must be a multiple of the hop size");
  if (window_kind == WindowKind::kCustomPrototype &&
      static_cast<int>(custom_prototype.size()) != window_len_samples)
    throw ConfigError("custom prototype length differs from window length");
}

std::vector<double> analysis_window(const FilterbankConfig& cfg) {
  const int len = cfg.window_len_samples;
  if (cfg.window_kind == WindowKind::kCustomPrototype) return cfg.custom_prototype;
  std::vector<double> w(len);
  for (int n = 0; n < len; ++n)
    w[n] = std::sqrt(0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / len)));
  return w;
}

std::vector<double> synthesis_window(const FilterbankConfig& cfg) {
  const std::vector<double> wa = analysis_window(cfg);
  const int len = cfg.window_len_samples;
  const int hop = cfg.hop_samples;
  std::vector<double> norm(hop, 0.0);
  for (int n = 0; n < len; ++n) norm[n % hop] += wa[n] * wa[n];
  for (double v : norm)
    if (v <= 0.0) throw ConfigError("analysis prototype does not cover every hop phase");
  std::vector<double> ws(len);
  for (int n = 0; n < len; ++n) ws[n] = wa[n] / norm[n % hop];
  return ws;
}

Analyzer::Analyzer(const FilterbankConfig& cfg)
    : cfg_(cfg), dft_(cfg.dft_size()) {
  cfg_.validate();
  window_ = analysis_window(cfg_);
  history_.assign(cfg_.window_len_samples, 0.0);
  folded_.assign(cfg_.dft_size(), 0.0);
}

void Analyzer::reset() {
  std::fill(history_.begin(), history_.end(), 0.0);
  next_index_ = 0;
}

SubbandFrame Analyzer::push(std::span<const double> hop) {
  const int r = cfg_.hop_samples;
  if (static_cast<int>(hop.size()) != r)
    throw ConfigError("analysis expects exactly one hop of samples");
  for (double s : hop)
    if (!std::isfinite(s)) throw DataError("non-finite input sample");

  std::shift_left(history_.begin(), history_.end(), r);
  std::copy(hop.begin(), hop.end(), history_.end() - r);

  const int n_dft = cfg_.dft_size();
  std::fill(folded_.begin(), folded_.end(), 0.0);
  for (int j = 0; j < cfg_.window_len_samples; ++j)
    folded_[j % n_dft] += window_[j] * history_[j];

  SubbandFrame frame;
  frame.index = next_index_++;
  frame.bins.resize(dft_.num_bins());
  dft_.forward(folded_, frame.bins);
  return frame;
}

Synthesizer::Synthesizer(const FilterbankConfig& cfg)
    : cfg_(cfg), dft_(cfg.dft_size()) {
  cfg_.validate();
  window_ = synthesis_window(cfg_);
  time_.assign(cfg_.dft_size(), 0.0);
  accum_.assign(cfg_.window_len_samples, 0.0);
  pending_.assign(cfg_.hop_samples - 1, 0.0);
}

void Synthesizer::reset() {
  std::fill(accum_.begin(), accum_.end(), 0.0);
  std::fill(pending_.begin(), pending_.end(), 0.0);
}

void Synthesizer::push(const SubbandFrame& frame, std::vector<double>& out) {
  if (static_cast<int>(frame.bins.size()) != dft_.num_bins())
    throw ConfigError("frame has " + std::to_string(frame.bins.size()) +
                      " bins, synthesis expects " + std::to_string(dft_.num_bins()));
  dft_.inverse(frame.bins, time_);
  const int n_dft = cfg_.dft_size();
  const int len = cfg_.window_len_samples;
  const int r = cfg_.hop_samples;
  for (int j = 0; j < len; ++j) accum_[j] += window_[j] * time_[j % n_dft];

  // Release order: the R - 1 delayed samples, then the first sample of the
  // newly completed block; the remainder of the block becomes pending.
  out.insert(out.end(), pending_.begin(), pending_.end());
  out.push_back(accum_[0]);
  std::copy(accum_.begin() + 1, accum_.begin() + r, pending_.begin());

  std::shift_left(accum_.begin(), accum_.end(), r);
  std::fill(accum_.end() - r, accum_.end(), 0.0);
}

std::vector<SubbandFrame> analyze(std::span<const double> pcm,
                                  const FilterbankConfig& cfg) {
  Analyzer an(cfg);
  const std::size_t r = cfg.hop_samples;
  const std::size_t n_frames = (pcm.size() + r - 1) / r;
  std::vector<SubbandFrame> frames;
  frames.reserve(n_frames);
  std::vector<double> hop(r);
  for (std::size_t k = 0; k < n_frames; ++k) {
    std::fill(hop.begin(), hop.end(), 0.0);
    const std::size_t begin = k * r;
    const std::size_t end = std::min(pcm.size(), begin + r);
    std::copy(pcm.begin() + begin, pcm.begin() + end, hop.begin());
    frames.push_back(an.push(hop));
  }
  return frames;
}

Signal synthesize(std::span<const SubbandFrame> frames,
                  const FilterbankConfig& cfg) {
  Synthesizer syn(cfg);
  Signal out;
  out.reserve(frames.size() * cfg.hop_samples);
  for (const auto& f : frames) syn.push(f, out);
  return out;
}

int group_delay(const FilterbankConfig& cfg) {
  cfg.validate();
  const int len = cfg.window_len_samples;
  Signal impulse(static_cast<std::size_t>(3 * len + cfg.hop_samples), 0.0);
  impulse[0] = 1.0;
  const Signal y = synthesize(analyze(impulse, cfg), cfg);
  const auto peak = std::max_element(y.begin(), y.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  return static_cast<int>(peak - y.begin());
}

int check_latency_budget(const FilterbankConfig& cfg, int lookahead_frames) {
  const int delay = group_delay(cfg);
  if (delay > kFilterbankDelayLimit)
    throw ConfigError("filter bank delay " + std::to_string(delay) +
                      " samples exceeds " + std::to_string(kFilterbankDelayLimit));
  const int total = delay + lookahead_frames * cfg.hop_samples;
  if (total > kLatencyBudget)
    throw ConfigError("total latency " + std::to_string(total) +
                      " samples exceeds the " + std::to_string(kLatencyBudget) +
                      "-sample budget");
  return total;
}

}  // namespace hanr
