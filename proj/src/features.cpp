#include "hanr/features.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "hanr/binio.hpp"
#include "hanr/error.hpp"

namespace hanr {

void ContextConfig::validate() const {
  if (tau1_frames < 0 || tau2_frames < 0)
    throw ConfigError("context lengths must be non-negative");
  if (num_bands <= 0) throw ConfigError("num_bands must be positive");
}

std::vector<double> log_power(const SubbandFrame& frame) {
  const int bands = frame.num_bands();
  std::vector<double> out(bands);
  for (int f = 0; f < bands; ++f)
    out[f] = std::log(std::max(std::norm(frame.bins[f]), kPowerFloor));
  return out;
}

ContextWindow normalize(std::span<const double> raw, int frames, int num_bands) {
  if (frames <= 0 || raw.size() != static_cast<std::size_t>(frames) * num_bands)
    throw ConfigError("context window shape mismatch");
  ContextWindow win;
  win.frames = frames;
  win.num_bands = num_bands;
  win.mu.assign(num_bands, 0.0);
  win.sigma.assign(num_bands, 0.0);
  for (int t = 0; t < frames; ++t)
    for (int f = 0; f < num_bands; ++f) win.mu[f] += raw[t * num_bands + f];
  for (double& m : win.mu) m /= frames;

  win.logpow.resize(raw.size());
  for (int t = 0; t < frames; ++t) {
    for (int f = 0; f < num_bands; ++f) {
      const double d = raw[t * num_bands + f] - win.mu[f];
      win.logpow[t * num_bands + f] = d;
      win.sigma[f] += d * d;
    }
  }
  for (double& s : win.sigma) s = std::sqrt(s / frames);
  return win;
}

FeatureVector assemble_input(const ContextWindow& win) {
  FeatureVector out;
  out.reserve(win.logpow.size() + win.mu.size() + win.sigma.size());
  out.insert(out.end(), win.logpow.begin(), win.logpow.end());
  out.insert(out.end(), win.mu.begin(), win.mu.end());
  out.insert(out.end(), win.sigma.begin(), win.sigma.end());
  return out;
}

ContextBuffer::ContextBuffer(const ContextConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  ring_.assign(static_cast<std::size_t>(cfg_.total()) * cfg_.num_bands, 0.0);
  scratch_.resize(ring_.size());
}

void ContextBuffer::reset() {
  next_index_ = 0;
  filled_ = 0;
  head_ = 0;
}

std::optional<ContextWindow> ContextBuffer::push(const SubbandFrame& frame) {
  if (frame.num_bands() != cfg_.num_bands)
    throw ConfigError("frame band count differs from context configuration");
  return push(frame.index, log_power(frame));
}

std::optional<ContextWindow> ContextBuffer::push(std::int64_t index,
                                                 std::span<const double> logpow) {
  if (index != next_index_)
    throw DataError("frame " + std::to_string(index) + " pushed, expected " +
                    std::to_string(next_index_));
  if (static_cast<int>(logpow.size()) != cfg_.num_bands)
    throw ConfigError("log-power vector has wrong length");
  ++next_index_;

  const int total = cfg_.total();
  const int bands = cfg_.num_bands;
  std::copy(logpow.begin(), logpow.end(), ring_.begin() + head_ * bands);
  head_ = (head_ + 1) % total;
  if (filled_ < total) ++filled_;
  if (filled_ < total) return std::nullopt;

  // head_ now points at the oldest frame.
  for (int t = 0; t < total; ++t) {
    const int slot = (head_ + t) % total;
    std::copy_n(ring_.begin() + slot * bands, bands, scratch_.begin() + t * bands);
  }
  ContextWindow win = normalize(scratch_, total, bands);
  win.center_frame_index = index - cfg_.tau2_frames;
  return win;
}

std::size_t FeatureSet::size() const {
  return targets.size() / static_cast<std::size_t>(output_dim());
}

std::span<const float> FeatureSet::input(std::size_t i) const {
  const std::size_t d = input_dim();
  return std::span(inputs).subspan(i * d, d);
}

std::span<const float> FeatureSet::target(std::size_t i) const {
  const std::size_t d = output_dim();
  return std::span(targets).subspan(i * d, d);
}

void FeatureSet::append(std::span<const double> features, std::span<const double> gains) {
  if (static_cast<int>(features.size()) != input_dim() ||
      static_cast<int>(gains.size()) != output_dim())
    throw ConfigError("feature record has wrong dimensions");
  for (double v : features) inputs.push_back(static_cast<float>(v));
  for (double v : gains) targets.push_back(static_cast<float>(v));
}

void FeatureSet::append(std::span<const float> features, std::span<const float> gains) {
  if (static_cast<int>(features.size()) != input_dim() ||
      static_cast<int>(gains.size()) != output_dim())
    throw ConfigError("feature record has wrong dimensions");
  inputs.insert(inputs.end(), features.begin(), features.end());
  targets.insert(targets.end(), gains.begin(), gains.end());
}

void save_features(const FeatureSet& set, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  binio::write_magic(os, "HADF");
  binio::write_u32(os, kFeatureFileVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(set.context.tau1_frames));
  binio::write_u32(os, static_cast<std::uint32_t>(set.context.tau2_frames));
  binio::write_u32(os, static_cast<std::uint32_t>(set.context.num_bands));
  for (std::size_t i = 0; i < set.size(); ++i) {
    binio::write_f32s(os, set.input(i));
    binio::write_f32s(os, set.target(i));
  }
  if (!os) throw DataError("write failed: " + path.string());
}

FeatureSet load_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  binio::expect_magic(is, "HADF");
  if (binio::read_u32(is) != kFeatureFileVersion)
    throw DataError(path.string() + ": unsupported feature file version");
  FeatureSet set;
  set.context.tau1_frames = static_cast<int>(binio::read_u32(is));
  set.context.tau2_frames = static_cast<int>(binio::read_u32(is));
  set.context.num_bands = static_cast<int>(binio::read_u32(is));
  set.context.validate();

  const auto header_end = is.tellg();
  is.seekg(0, std::ios::end);
  const auto payload = static_cast<std::size_t>(is.tellg() - header_end);
  is.seekg(header_end);
  const std::size_t rec =
      (static_cast<std::size_t>(set.input_dim()) + set.output_dim()) * sizeof(float);
  if (payload % rec != 0) throw DataError(path.string() + ": truncated feature record");
  const std::size_t n = payload / rec;
  set.inputs.resize(n * set.input_dim());
  set.targets.resize(n * set.output_dim());
  for (std::size_t i = 0; i < n; ++i) {
    binio::read_f32s(is, std::span(set.inputs).subspan(i * set.input_dim(), set.input_dim()));
    binio::read_f32s(is, std::span(set.targets).subspan(i * set.output_dim(), set.output_dim()));
  }
  return set;
}

}  // namespace hanr
