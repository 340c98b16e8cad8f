#include "hanr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>

#include "hanr/binio.hpp"
#include "hanr/error.hpp"
#include "hanr/wiener.hpp"

namespace hanr {

std::string to_string(Profile p) {
  return p == Profile::kPaperScale ? "paper_scale" : "desk_scale";
}

Profile profile_from_string(const std::string& s) {
  if (s == "paper_scale") return Profile::kPaperScale;
  if (s == "desk_scale") return Profile::kDeskScale;
  throw ConfigError("unknown profile '" + s + "' (paper_scale | desk_scale)");
}

PipelineConfig PipelineConfig::preset(Profile p) {
  PipelineConfig c;
  c.profile = p;
  c.context.tau2_frames = 2;
  c.topology.hidden_layers = 3;
  if (p == Profile::kPaperScale) {
    c.context.tau1_frames = 200;
    c.topology.hidden_width = 2048;
    c.train.learning_rate = 1e-5;
    c.train.epochs = 10;
    c.feature_stride = 1;
  } else {
    c.context.tau1_frames = 30;
    c.topology.hidden_width = 256;
    c.train.learning_rate = 1e-4;
    c.train.epochs = 10;
    c.feature_stride = 4;
  }
  c.resolve();
  return c;
}

void PipelineConfig::resolve() {
  topology.input_dim = context.feature_dim();
  topology.output_dim = context.num_bands;
  topology.max_atten_db = max_atten_db;
  baseline.max_atten_db = max_atten_db;
  anchor.max_atten_db = max_atten_db;
}

void PipelineConfig::validate() const {
  filterbank.validate();
  context.validate();
  topology.validate();
  train.validate();
  baseline.validate();
  anchor.validate();
  gain_floor(max_atten_db);
  if (context.num_bands != filterbank.num_bands)
    throw ConfigError("context and filter bank disagree on band count");
  if (topology.input_dim != context.feature_dim())
    throw ConfigError("network input " + std::to_string(topology.input_dim) +
                      " != (tau1 + 1 + tau2) * 48 + 96 = " +
                      std::to_string(context.feature_dim()));
  if (feature_stride < 1) throw ConfigError("feature_stride must be >= 1");
  if (init_cut_seconds < 0.0) throw ConfigError("init_cut_seconds must be >= 0");
  if (deployment) {
    if (context.tau2_frames * filterbank.hop_samples > 48)
      throw ConfigError("deployment lookahead is limited to 48 samples (2 ms)");
    check_latency_budget(filterbank, context.tau2_frames);
  }
}

int PipelineConfig::total_latency_samples() const {
  return group_delay(filterbank) + context.tau2_frames * filterbank.hop_samples;
}

nlohmann::ordered_json PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["profile"] = to_string(profile);
  j["filterbank"] = {
      {"sample_rate_hz", filterbank.sample_rate_hz},
      {"num_bands", filterbank.num_bands},
      {"hop_samples", filterbank.hop_samples},
      {"window_len_samples", filterbank.window_len_samples},
      {"window_kind", filterbank.window_kind == WindowKind::kSqrtHann ? "sqrt_hann"
                                                                      : "custom_prototype"}};
  if (filterbank.window_kind == WindowKind::kCustomPrototype)
    j["filterbank"]["custom_prototype"] = filterbank.custom_prototype;
  j["context"] = {{"tau1_frames", context.tau1_frames}, {"tau2_frames", context.tau2_frames}};
  j["network"] = {{"input_dim", topology.input_dim},
                  {"hidden_layers", topology.hidden_layers},
                  {"hidden_width", topology.hidden_width},
                  {"output_dim", topology.output_dim}};
  j["train"] = {{"learning_rate", train.learning_rate}, {"epochs", train.epochs},
                {"batch_size", train.batch_size},       {"adam_beta1", train.adam_beta1},
                {"adam_beta2", train.adam_beta2},       {"adam_eps", train.adam_eps},
                {"rng_seed", train.rng_seed}};
  j["max_atten_db"] = max_atten_db;
  j["deployment"] = deployment;
  j["mix"] = {{"snr_set_db", mix.snr_set_db},
              {"level_set_db", mix.level_set_db},
              {"mixtures_train", mix.mixtures_train},
              {"mixtures_val", mix.mixtures_val},
              {"mixtures_test", mix.mixtures_test},
              {"ratios", {mix.ratios.train, mix.ratios.val, mix.ratios.test}},
              {"seed", mix.seed}};
  j["synth"] = {{"num_speech", synth.num_speech}, {"num_noise", synth.num_noise},
                {"speech_seconds", synth.speech_seconds}, {"noise_seconds", synth.noise_seconds},
                {"seed", synth.seed}};
  j["baseline"] = {{"alpha", baseline.alpha},
                   {"inc_db_per_s", baseline.inc_db_per_s()},
                   {"bias_compensation", baseline.bias_compensation}};
  j["anchor"] = {{"window_frames", anchor.window_frames}, {"alpha", anchor.alpha}};
  j["init_cut_seconds"] = init_cut_seconds;
  j["feature_stride"] = feature_stride;
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  try {
    PipelineConfig c = preset(profile_from_string(j.value("profile", std::string("desk_scale"))));
    if (auto it = j.find("filterbank"); it != j.end()) {
      const auto& f = *it;
      c.filterbank.sample_rate_hz = f.value("sample_rate_hz", c.filterbank.sample_rate_hz);
      c.filterbank.num_bands = f.value("num_bands", c.filterbank.num_bands);
      c.filterbank.hop_samples = f.value("hop_samples", c.filterbank.hop_samples);
      c.filterbank.window_len_samples = f.value("window_len_samples", c.filterbank.window_len_samples);
      const std::string kind = f.value("window_kind", std::string("sqrt_hann"));
      if (kind == "sqrt_hann") {
        c.filterbank.window_kind = WindowKind::kSqrtHann;
      } else if (kind == "custom_prototype") {
        c.filterbank.window_kind = WindowKind::kCustomPrototype;
        c.filterbank.custom_prototype = f.at("custom_prototype").get<std::vector<double>>();
      } else {
        throw ConfigError("unknown window_kind '" + kind + "'");
      }
    }
    if (auto it = j.find("context"); it != j.end()) {
      c.context.tau1_frames = it->value("tau1_frames", c.context.tau1_frames);
      c.context.tau2_frames = it->value("tau2_frames", c.context.tau2_frames);
    }
    if (auto it = j.find("network"); it != j.end()) {
      c.topology.hidden_layers = it->value("hidden_layers", c.topology.hidden_layers);
      c.topology.hidden_width = it->value("hidden_width", c.topology.hidden_width);
    }
    if (auto it = j.find("train"); it != j.end()) {
      auto& t = c.train;
      t.learning_rate = it->value("learning_rate", t.learning_rate);
      t.epochs = it->value("epochs", t.epochs);
      t.batch_size = it->value("batch_size", t.batch_size);
      t.adam_beta1 = it->value("adam_beta1", t.adam_beta1);
      t.adam_beta2 = it->value("adam_beta2", t.adam_beta2);
      t.adam_eps = it->value("adam_eps", t.adam_eps);
      t.rng_seed = it->value("rng_seed", t.rng_seed);
    }
    c.max_atten_db = j.value("max_atten_db", c.max_atten_db);
    c.deployment = j.value("deployment", c.deployment);
    if (auto it = j.find("mix"); it != j.end()) {
      auto& m = c.mix;
      m.snr_set_db = it->value("snr_set_db", m.snr_set_db);
      m.level_set_db = it->value("level_set_db", m.level_set_db);
      m.mixtures_train = it->value("mixtures_train", m.mixtures_train);
      m.mixtures_val = it->value("mixtures_val", m.mixtures_val);
      m.mixtures_test = it->value("mixtures_test", m.mixtures_test);
      if (it->contains("ratios")) {
        const auto r = it->at("ratios").get<std::vector<double>>();
        if (r.size() != 3) throw ConfigError("mix.ratios needs three entries");
        m.ratios = {r[0], r[1], r[2]};
      }
      m.seed = it->value("seed", m.seed);
    }
    if (auto it = j.find("synth"); it != j.end()) {
      auto& s = c.synth;
      s.num_speech = it->value("num_speech", s.num_speech);
      s.num_noise = it->value("num_noise", s.num_noise);
      s.speech_seconds = it->value("speech_seconds", s.speech_seconds);
      s.noise_seconds = it->value("noise_seconds", s.noise_seconds);
      s.seed = it->value("seed", s.seed);
    }
    if (auto it = j.find("baseline"); it != j.end()) {
      c.baseline.alpha = it->value("alpha", c.baseline.alpha);
      if (it->contains("inc_db_per_s"))
        c.baseline.inc_per_frame = MinTrackConfig::inc_from_db_per_s(it->at("inc_db_per_s").get<double>());
      c.baseline.bias_compensation = it->value("bias_compensation", c.baseline.bias_compensation);
    }
    if (auto it = j.find("anchor"); it != j.end()) {
      c.anchor.window_frames = it->value("window_frames", c.anchor.window_frames);
      c.anchor.alpha = it->value("alpha", c.anchor.alpha);
    }
    c.init_cut_seconds = j.value("init_cut_seconds", c.init_cut_seconds);
    c.feature_stride = j.value("feature_stride", c.feature_stride);
    c.resolve();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

std::uint64_t PipelineConfig::hash() const { return binio::fnv1a(to_json().dump()); }

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return PipelineConfig::from_json(j);
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << cfg.to_json().dump(2) << '\n';
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  return binio::fnv1a(bytes);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

StreamEnhancer::StreamEnhancer(const PipelineConfig& cfg, const NetworkParams& model)
    : cfg_(cfg),
      model_(model),
      analyzer_(cfg.filterbank),
      synth_(cfg.filterbank),
      context_(cfg.context) {
  if (model.topology.input_dim != cfg.context.feature_dim())
    throw ConfigError("model expects " + std::to_string(model.topology.input_dim) +
                      " inputs but the context produces " +
                      std::to_string(cfg.context.feature_dim()));
  latency_ = cfg.total_latency_samples();
}

void StreamEnhancer::push(std::span<const double> hop, std::vector<double>& out) {
  SubbandFrame frame = analyzer_.push(hop);
  const std::int64_t center = frame.index - cfg_.context.tau2_frames;
  auto window = context_.push(frame);
  pending_.push_back(std::move(frame));
  if (static_cast<int>(pending_.size()) > cfg_.context.tau2_frames + 1)
    pending_.erase(pending_.begin());

  if (center < 0) {
    SubbandFrame silent;
    silent.bins.assign(pending_.back().bins.size(), Complex{});
    synth_.push(silent, out);
    return;
  }
  const SubbandFrame& target = pending_.front();
  GainVector g;
  if (window) {
    const FeatureVector fv = assemble_input(*window);
    input_.assign(fv.begin(), fv.end());
    g = forward(model_, std::span<const float>(input_));
  } else {
    g.assign(target.num_bands(), 1.0);  // context warm-up: pass through
  }
  synth_.push(apply_gain(target, g), out);
  trace_.push(center, std::move(g));
}

EnhanceResult enhance_stream(std::span<const double> input, const NetworkParams& model,
                             const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  StreamEnhancer enh(cfg, model);
  const std::size_t hop = cfg.filterbank.hop_samples;
  EnhanceResult res;
  res.output.reserve(input.size() + hop);
  std::vector<double> buf(hop);
  for (std::size_t start = 0; start < input.size(); start += hop) {
    std::fill(buf.begin(), buf.end(), 0.0);
    const std::size_t end = std::min(input.size(), start + hop);
    std::copy(input.begin() + start, input.begin() + end, buf.begin());
    enh.push(buf, res.output);
  }
  res.output.resize(input.size());
  res.trace = enh.trace();
  res.latency_samples = enh.latency_samples();
  res.seconds_elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double audio_seconds = static_cast<double>(input.size()) / cfg.filterbank.sample_rate_hz;
  res.realtime_factor = audio_seconds > 0.0 ? res.seconds_elapsed / audio_seconds : 0.0;
  return res;
}

std::string to_string(System s) {
  switch (s) {
    case System::kNoisy: return "noisy";
    case System::kDnn: return "dnn";
    case System::kBaseline: return "baseline";
    case System::kAnchor: return "anchor";
    case System::kIdealWiener: return "ideal_wiener";
  }
  return "?";
}

System system_from_string(const std::string& s) {
  for (System sys : all_systems())
    if (to_string(sys) == s) return sys;
  throw ConfigError("unknown system '" + s + "'");
}

std::vector<System> all_systems() {
  return {System::kNoisy, System::kDnn, System::kBaseline, System::kAnchor, System::kIdealWiener};
}

MixtureFrames analyze_mixture(const MixManifest& m, const MixedSignals& sig,
                              const PipelineConfig& cfg) {
  const auto xf = analyze(sig.x, cfg.filterbank);
  const auto sf = analyze(sig.s, cfg.filterbank);
  const auto nf = analyze(sig.n, cfg.filterbank);
  MixtureFrames out;
  out.mixture_id = m.mixture_id;
  out.split = m.split;
  out.snr_db = m.target_snr_db;
  out.frames = static_cast<int>(xf.size());
  const int bands = cfg.filterbank.num_bands;
  out.logpow.reserve(xf.size() * bands);
  out.target.reserve(xf.size() * bands);
  for (std::size_t k = 0; k < xf.size(); ++k) {
    for (double v : log_power(xf[k])) out.logpow.push_back(static_cast<float>(v));
    for (double g : clamp_gain(ideal_gain(sf[k], nf[k]), cfg.max_atten_db))
      out.target.push_back(static_cast<float>(g));
  }
  return out;
}

FeatureSet build_features(std::span<const MixtureFrames> mixtures, const ContextConfig& context,
                          const PipelineConfig& cfg, std::int64_t min_center) {
  FeatureSet set;
  set.context = context;
  const int bands = context.num_bands;
  const int warmup = cfg.filterbank.warmup_frames();
  std::vector<double> row(bands);
  for (const auto& mx : mixtures) {
    ContextBuffer buf(context);
    for (int k = 0; k < mx.frames; ++k) {
      std::copy_n(mx.logpow.begin() + static_cast<std::ptrdiff_t>(k) * bands, bands, row.begin());
      auto win = buf.push(k, row);
      if (!win) continue;
      const auto c = win->center_frame_index;
      if (c < warmup || c < min_center || c % cfg.feature_stride != 0) continue;
      const FeatureVector fv = assemble_input(*win);
      std::vector<float> in(fv.begin(), fv.end());
      set.append(std::span<const float>(in),
                 std::span<const float>(mx.target.data() + c * bands, bands));
    }
  }
  return set;
}

namespace {

struct SystemRun {
  Signal output;
  GainTrace trace;
  int latency = 0;
};

template <typename GainFn>
SystemRun run_frame_system(const std::vector<SubbandFrame>& x_frames, const FilterbankConfig& fb,
                           int delay, GainFn&& gain_for) {
  SystemRun run;
  run.latency = delay;
  std::vector<SubbandFrame> out;
  out.reserve(x_frames.size());
  for (std::size_t k = 0; k < x_frames.size(); ++k) {
    GainVector g = gain_for(k);
    out.push_back(apply_gain(x_frames[k], g));
    run.trace.push(static_cast<std::int64_t>(k), std::move(g));
  }
  run.output = synthesize(out, fb);
  return run;
}

}  // namespace

std::vector<EvalRecord> evaluate_mixture(const MixManifest& m, const MixedSignals& sig,
                                         const PipelineConfig& cfg, const EvalOptions& opt) {
  const auto& fb = cfg.filterbank;
  const auto xf = analyze(sig.x, fb);
  const auto sf = analyze(sig.s, fb);
  const auto nf = analyze(sig.n, fb);
  const int fb_delay = group_delay(fb);
  const int max_latency = fb_delay + cfg.context.tau2_frames * fb.hop_samples;
  const double frames_per_s = static_cast<double>(fb.sample_rate_hz) / fb.hop_samples;
  const auto skip_frames = std::max<std::int64_t>(
      {fb.warmup_frames(), std::llround(cfg.init_cut_seconds * frames_per_s)});
  const std::size_t skip_samples = static_cast<std::size_t>(skip_frames) * fb.hop_samples;
  const std::size_t len = sig.x.size();
  if (len <= skip_samples + max_latency)
    throw DataError(m.mixture_id + ": mixture shorter than the initialisation cut");
  const std::size_t win_len = len - skip_samples - max_latency;

  const std::span<const double> clean(sig.s.data() + skip_samples, win_len);
  const std::span<const double> noisy(sig.x.data() + skip_samples, win_len);
  const double stoi_noisy = stoi(clean, noisy, fb.sample_rate_hz);

  std::vector<EvalRecord> recs;
  for (System sys : opt.systems) {
    SystemRun run;
    switch (sys) {
      case System::kNoisy:
        run.output = sig.x;
        for (std::size_t k = 0; k < xf.size(); ++k)
          run.trace.push(static_cast<std::int64_t>(k), GainVector(fb.num_bands, 1.0));
        break;
      case System::kIdealWiener:
        run = run_frame_system(xf, fb, fb_delay, [&](std::size_t k) {
          return clamp_gain(ideal_gain(sf[k], nf[k]), cfg.max_atten_db);
        });
        break;
      case System::kBaseline: {
        MinTrackSuppressor sup(cfg.baseline);
        run = run_frame_system(xf, fb, fb_delay, [&](std::size_t k) { return sup.process(xf[k]); });
        break;
      }
      case System::kAnchor: {
        MinStatsAnchor anchor(cfg.anchor);
        run = run_frame_system(xf, fb, fb_delay, [&](std::size_t k) { return anchor.process(xf[k]); });
        break;
      }
      case System::kDnn: {
        if (!opt.model) throw ConfigError("system 'dnn' requires a trained model");
        EnhanceResult r = enhance_stream(sig.x, *opt.model, cfg);
        run.output = std::move(r.output);
        run.trace = std::move(r.trace);
        run.latency = r.latency_samples;
        break;
      }
    }
    EvalRecord rec;
    rec.mixture_id = m.mixture_id;
    rec.snr_db = m.target_snr_db;
    rec.system = to_string(sys);
    if (sys == System::kNoisy) {
      rec.stoi = stoi_noisy;
      rec.delta_stoi = 0.0;
    } else {
      const std::span<const double> enhanced(run.output.data() + skip_samples + run.latency, win_len);
      rec.stoi = stoi(clean, enhanced, fb.sample_rate_hz);
      rec.delta_stoi = rec.stoi - stoi_noisy;
    }
    const NrSd q = nr_sd(sf, nf, run.trace, skip_frames);
    rec.nr_db = q.nr_db;
    rec.sd_db = q.sd_db;
    recs.push_back(rec);
  }
  return recs;
}

std::vector<EvalRecord> evaluate_systems(std::span<const MixManifest> manifests,
                                         const Corpus& corpus, const PipelineConfig& cfg,
                                         const EvalOptions& opt) {
  if (std::find(opt.systems.begin(), opt.systems.end(), System::kDnn) != opt.systems.end() &&
      !opt.model)
    throw ConfigError("system 'dnn' requires a trained model");
  std::vector<EvalRecord> all;
  for (const auto& m : manifests) {
    const MixedSignals sig = realize(m, corpus);
    auto recs = evaluate_mixture(m, sig, cfg, opt);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return all;
}

std::vector<SweepPoint> context_sweep(std::span<const MixtureFrames> train_mix,
                                      std::span<const MixtureFrames> val_mix,
                                      const std::vector<std::pair<int, int>>& pairs,
                                      const PipelineConfig& cfg) {
  std::vector<SweepPoint> out;
  int max_tau1 = 0;
  for (const auto& pr : pairs) max_tau1 = std::max(max_tau1, pr.first);
  for (const auto& [tau1, tau2] : pairs) {
    ContextConfig ctx = cfg.context;
    ctx.tau1_frames = tau1;
    ctx.tau2_frames = tau2;
    ctx.validate();
    const FeatureSet tr = build_features(train_mix, ctx, cfg, max_tau1);
    const FeatureSet va = build_features(val_mix, ctx, cfg, max_tau1);
    NetworkTopology topo = cfg.topology;
    topo.input_dim = ctx.feature_dim();
    const TrainResult res = train(tr, &va, cfg.train, topo);
    SweepPoint p;
    p.tau1_frames = tau1;
    p.tau2_frames = tau2;
    p.final_train_rmse = res.history.back().train_rmse;
    p.final_val_rmse = res.history.back().val_rmse;
    p.train_records = tr.size();
    out.push_back(p);
  }
  return out;
}

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::filesystem::path& path,
                     int hop_samples) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  const double ms_per_frame = 1000.0 * hop_samples / kSampleRate;
  os << "tau1_frames,tau2_frames,tau1_ms,tau2_ms,train_records,final_train_rmse,final_val_rmse\n";
  os.precision(10);
  for (const auto& p : points)
    os << p.tau1_frames << ',' << p.tau2_frames << ',' << p.tau1_frames * ms_per_frame << ','
       << p.tau2_frames * ms_per_frame << ',' << p.train_records << ',' << p.final_train_rmse
       << ',' << p.final_val_rmse << '\n';
}

bool lookback_trend_holds(const std::vector<SweepPoint>& points) {
  std::map<int, std::vector<std::pair<int, double>>> by_tau2;
  for (const auto& p : points) by_tau2[p.tau2_frames].emplace_back(p.tau1_frames, p.final_val_rmse);
  for (auto& [tau2, v] : by_tau2) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i].first > v[i - 1].first && v[i].second > v[i - 1].second) return false;
  }
  return true;
}

}  // namespace hanr
