#pragma once

// End-to-end experiments: streaming enhancement, training-set extraction,
// multi-system evaluation and the look-back/lookahead context sweep.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hanr/baseline.hpp"
#include "hanr/dataset.hpp"
#include "hanr/features.hpp"
#include "hanr/filterbank.hpp"
#include "hanr/metrics.hpp"
#include "hanr/network.hpp"
#include "hanr/synth.hpp"

namespace hanr {

enum class Profile { kPaperScale, kDeskScale };

std::string to_string(Profile p);
Profile profile_from_string(const std::string& s);

struct PipelineConfig {
  Profile profile = Profile::kDeskScale;
  FilterbankConfig filterbank;
  ContextConfig context;
  NetworkTopology topology;
  TrainConfig train;
  double max_atten_db = kDefaultMaxAttenDb;
  // Deployment enforces the 6 ms filter bank and 8 ms total latency limits;
  // experiments (e.g. long-lookahead sweeps) may switch it off.
  bool deployment = true;

  MixConfig mix;
  SynthCorpusConfig synth;
  MinTrackConfig baseline;
  AnchorConfig anchor;
  double init_cut_seconds = 1.0;  // discarded from every metric
  int feature_stride = 4;         // keep every n-th frame as a training record

  static PipelineConfig preset(Profile p);

  // Re-derives topology.input_dim and max-attenuation fields from context.
  void resolve();
  void validate() const;
  int total_latency_samples() const;

  nlohmann::ordered_json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  std::uint64_t hash() const;
};

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

std::uint64_t file_hash(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

struct EnhanceResult {
  Signal output;  // same length as the input, delayed by latency_samples
  GainTrace trace;
  int latency_samples = 0;
  double seconds_elapsed = 0.0;
  double realtime_factor = 0.0;  // processing time / audio duration
};

// Streaming network enhancer: one hop in, one hop out.
class StreamEnhancer {
 public:
  StreamEnhancer(const PipelineConfig& cfg, const NetworkParams& model);

  // Appends hop_samples samples to out.
  void push(std::span<const double> hop, std::vector<double>& out);
  const GainTrace& trace() const { return trace_; }
  int latency_samples() const { return latency_; }

 private:
  PipelineConfig cfg_;
  const NetworkParams& model_;
  Analyzer analyzer_;
  Synthesizer synth_;
  ContextBuffer context_;
  std::vector<SubbandFrame> pending_;  // last tau2 + 1 frames, oldest first
  GainTrace trace_;
  int latency_ = 0;
  std::vector<float> input_;
};

EnhanceResult enhance_stream(std::span<const double> input, const NetworkParams& model,
                             const PipelineConfig& cfg);

// Causal per-frame gain computation for the classical systems and the
// oracle; all run without lookahead.
enum class System { kNoisy, kDnn, kBaseline, kAnchor, kIdealWiener };
std::string to_string(System s);
System system_from_string(const std::string& s);
std::vector<System> all_systems();

// Log-power of X and clamped ideal gains per frame, kept as float rows.
struct MixtureFrames {
  std::string mixture_id;
  Split split = Split::kTrain;
  double snr_db = 0.0;
  int frames = 0;
  std::vector<float> logpow;  // frames x num_bands
  std::vector<float> target;  // frames x num_bands
};

MixtureFrames analyze_mixture(const MixManifest& m, const MixedSignals& sig,
                              const PipelineConfig& cfg);

// Feature records for every window center past the filter bank warm-up and
// min_center, subsampled by cfg.feature_stride.
FeatureSet build_features(std::span<const MixtureFrames> mixtures, const ContextConfig& context,
                          const PipelineConfig& cfg, std::int64_t min_center = 0);

struct EvalOptions {
  std::vector<System> systems = all_systems();
  const NetworkParams* model = nullptr;  // required when kDnn is listed
};

std::vector<EvalRecord> evaluate_mixture(const MixManifest& m, const MixedSignals& sig,
                                         const PipelineConfig& cfg, const EvalOptions& opt);

std::vector<EvalRecord> evaluate_systems(std::span<const MixManifest> manifests,
                                         const Corpus& corpus, const PipelineConfig& cfg,
                                         const EvalOptions& opt);

struct SweepPoint {
  int tau1_frames = 0;
  int tau2_frames = 0;
  double final_train_rmse = 0.0;
  double final_val_rmse = 0.0;
  std::size_t train_records = 0;
};

// Trains one network per (tau1, tau2) pair with identical seeds and budget
// and reports the final validation RMSE. Every point uses the same window
// centers (those with a full context for the largest tau1).
std::vector<SweepPoint> context_sweep(std::span<const MixtureFrames> train,
                                      std::span<const MixtureFrames> val,
                                      const std::vector<std::pair<int, int>>& pairs,
                                      const PipelineConfig& cfg);

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::filesystem::path& path,
                     int hop_samples = 24);

// True when validation RMSE never increases with tau1 among points sharing a
// tau2 (lookback trend) -- the qualitative context dependency.
bool lookback_trend_holds(const std::vector<SweepPoint>& points);

}  // namespace hanr
