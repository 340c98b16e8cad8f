// hanr: command-line front end for mixing, training, enhancement and
// evaluation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hanr/error.hpp"
#include "hanr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hanr;

namespace {

// Flags that mirror PipelineConfig fields. Only flags given on the command
// line override the preset or the --config file.
struct ConfigFlags {
  std::string config_path;
  std::string profile;
  std::uint64_t seed = 0;
  int tau1 = 0, tau2 = 0, hidden_width = 0, hidden_layers = 0, epochs = 0, batch = 0;
  int stride = 0, anchor_window = 0, m_train = 0, m_val = 0, m_test = 0;
  double lr = 0, max_atten = 0, alpha = 0, inc_db = 0, bias = 0, anchor_alpha = 0, init_cut = 0;
  bool no_deployment = false;
  CLI::Option *o_seed, *o_tau1, *o_tau2, *o_width, *o_layers, *o_epochs, *o_batch, *o_stride,
      *o_anchor_window, *o_mtrain, *o_mval, *o_mtest, *o_lr, *o_atten, *o_alpha, *o_inc, *o_bias,
      *o_anchor_alpha, *o_init_cut, *o_profile;

  void add(CLI::App& app) {
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    o_profile = app.add_option("--profile", profile, "desk_scale | paper_scale");
    o_seed = app.add_option("--seed", seed, "seed for mixing and training");
    o_tau1 = app.add_option("--tau1", tau1, "look-back context in frames");
    o_tau2 = app.add_option("--tau2", tau2, "lookahead context in frames");
    o_width = app.add_option("--hidden-width", hidden_width);
    o_layers = app.add_option("--hidden-layers", hidden_layers);
    o_epochs = app.add_option("--epochs", epochs);
    o_batch = app.add_option("--batch-size", batch);
    o_lr = app.add_option("--lr", lr, "Adam learning rate");
    o_stride = app.add_option("--feature-stride", stride, "keep every n-th training frame");
    o_atten = app.add_option("--max-atten-db", max_atten);
    o_alpha = app.add_option("--alpha", alpha, "baseline power smoothing");
    o_inc = app.add_option("--inc-db-per-s", inc_db, "baseline minimum rise rate");
    o_bias = app.add_option("--bias-compensation", bias, "baseline noise estimate multiplier");
    o_anchor_window = app.add_option("--anchor-window-frames", anchor_window);
    o_anchor_alpha = app.add_option("--anchor-alpha", anchor_alpha);
    o_init_cut = app.add_option("--init-cut-seconds", init_cut);
    o_mtrain = app.add_option("--mixtures-train", m_train);
    o_mval = app.add_option("--mixtures-val", m_val);
    o_mtest = app.add_option("--mixtures-test", m_test);
    app.add_flag("--no-deployment", no_deployment, "lift the latency limits (experiments only)");
  }

  PipelineConfig resolve() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig::preset(Profile::kDeskScale)
                                           : load_config(config_path);
    if (o_profile->count()) {
      const Profile p = profile_from_string(profile);
      if (config_path.empty() || p != c.profile) c = PipelineConfig::preset(p);
    }
    if (o_seed->count()) {
      c.mix.seed = seed;
      c.train.rng_seed = seed;
    }
    if (o_tau1->count()) c.context.tau1_frames = tau1;
    if (o_tau2->count()) c.context.tau2_frames = tau2;
    if (o_width->count()) c.topology.hidden_width = hidden_width;
    if (o_layers->count()) c.topology.hidden_layers = hidden_layers;
    if (o_epochs->count()) c.train.epochs = epochs;
    if (o_batch->count()) c.train.batch_size = batch;
    if (o_lr->count()) c.train.learning_rate = lr;
    if (o_stride->count()) c.feature_stride = stride;
    if (o_atten->count()) c.max_atten_db = max_atten;
    if (o_alpha->count()) c.baseline.alpha = alpha;
    if (o_inc->count()) c.baseline.inc_per_frame = MinTrackConfig::inc_from_db_per_s(inc_db);
    if (o_bias->count()) c.baseline.bias_compensation = bias;
    if (o_anchor_window->count()) c.anchor.window_frames = anchor_window;
    if (o_anchor_alpha->count()) c.anchor.alpha = anchor_alpha;
    if (o_init_cut->count()) c.init_cut_seconds = init_cut;
    if (o_mtrain->count()) c.mix.mixtures_train = m_train;
    if (o_mval->count()) c.mix.mixtures_val = m_val;
    if (o_mtest->count()) c.mix.mixtures_test = m_test;
    if (no_deployment) c.deployment = false;
    c.resolve();
    c.validate();
    return c;
  }
};

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  ensure_parent(path);
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

// Resolved configuration snapshot next to the primary output.
void snapshot(const PipelineConfig& cfg, const fs::path& primary) {
  fs::path p = primary;
  p += ".config.json";
  write_json(p, cfg.to_json());
}

fs::path sidecar(const fs::path& p) {
  fs::path s = p;
  s += ".meta.json";
  return s;
}

nlohmann::ordered_json base_meta(const std::string& command, const PipelineConfig& cfg) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["config_hash"] = hex64(cfg.hash());
  m["mix_seed"] = cfg.mix.seed;
  m["train_seed"] = cfg.train.rng_seed;
  m["synth_seed"] = cfg.synth.seed;
  m["deterministic"] = true;
  return m;
}

Split parse_split(const std::string& s) { return split_from_string(s); }

std::vector<MixManifest> manifests_in(const std::vector<MixManifest>& all, Split s) {
  std::vector<MixManifest> out;
  for (const auto& m : all)
    if (m.split == s) out.push_back(m);
  return out;
}

std::vector<MixtureFrames> frames_for(const std::vector<MixManifest>& ms, const Corpus& corpus,
                                      const PipelineConfig& cfg) {
  std::vector<MixtureFrames> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(analyze_mixture(m, realize(m, corpus), cfg));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad integer '" + tok + "' in list '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

// ---- mix ----

struct MixArgs {
  std::string corpus_dir;
  std::string out_dir;
  bool synth = false;
  bool no_audio = false;
};

int run_mix(const ConfigFlags& flags, const MixArgs& a) {
  const PipelineConfig cfg = flags.resolve();
  const fs::path out(a.out_dir);
  fs::create_directories(out);
  fs::path corpus_dir = a.corpus_dir.empty() ? out / "corpus" : fs::path(a.corpus_dir);
  if (a.synth) {
    write_corpus(make_synthetic_corpus(cfg.synth), corpus_dir);
    std::cout << "synthesized corpus: " << corpus_dir.string() << '\n';
  } else if (a.corpus_dir.empty()) {
    throw ConfigError("mix needs --corpus DIR or --synth");
  }
  const Corpus corpus = load_corpus(corpus_dir, cfg.filterbank.sample_rate_hz);
  const auto split = split_corpus(corpus.speech_ids(), corpus.noise_ids(), cfg.mix.ratios, cfg.mix.seed);
  const auto manifests = generate_manifests(corpus, split, cfg.mix);
  const fs::path mpath = out / "manifests.jsonl";
  write_manifests(manifests, mpath);
  snapshot(cfg, mpath);

  if (!a.no_audio) {
    const fs::path mixdir = out / "mixtures";
    fs::create_directories(mixdir);
    for (const auto& m : manifests) {
      const MixedSignals sig = realize(m, corpus);
      write_wav(mixdir / (m.mixture_id + "_x.wav"), sig.x, cfg.filterbank.sample_rate_hz);
      write_wav(mixdir / (m.mixture_id + "_s.wav"), sig.s, cfg.filterbank.sample_rate_hz);
      write_wav(mixdir / (m.mixture_id + "_n.wav"), sig.n, cfg.filterbank.sample_rate_hz);
    }
  }
  auto meta = base_meta("mix", cfg);
  meta["corpus"] = corpus_dir.string();
  meta["manifest_hash"] = hex64(file_hash(mpath));
  meta["mixtures"] = manifests.size();
  write_json(sidecar(mpath), meta);
  std::cout << "wrote " << manifests.size() << " manifests to " << mpath.string() << '\n';
  return 0;
}

// ---- features ----

struct DataArgs {
  std::string corpus_dir;
  std::string manifests;
};

void add_data_args(CLI::App& app, DataArgs& d) {
  app.add_option("--corpus", d.corpus_dir, "corpus directory with speech/ and noise/")
      ->required()
      ->check(CLI::ExistingDirectory);
  app.add_option("--manifests", d.manifests, "manifests.jsonl written by mix")
      ->required()
      ->check(CLI::ExistingFile);
}

int run_features(const ConfigFlags& flags, const DataArgs& d, const std::string& split_name,
                 const std::string& out) {
  const PipelineConfig cfg = flags.resolve();
  const Corpus corpus = load_corpus(d.corpus_dir, cfg.filterbank.sample_rate_hz);
  const auto ms = manifests_in(read_manifests(d.manifests), parse_split(split_name));
  if (ms.empty()) throw DataError("no manifests in split '" + split_name + "'");
  const FeatureSet set = build_features(frames_for(ms, corpus, cfg), cfg.context, cfg);
  ensure_parent(out);
  save_features(set, out);
  snapshot(cfg, out);
  auto meta = base_meta("features", cfg);
  meta["manifest_hash"] = hex64(file_hash(d.manifests));
  meta["split"] = split_name;
  meta["records"] = set.size();
  meta["feature_dim"] = set.input_dim();
  write_json(sidecar(out), meta);
  std::cout << "wrote " << set.size() << " records of dimension " << set.input_dim() << " to "
            << out << '\n';
  return 0;
}

// ---- train ----

struct TrainArgs {
  DataArgs data;
  std::string features;
  std::string val_features;
  std::string model;
  std::string loss_csv;
};

int run_train(const ConfigFlags& flags, const TrainArgs& a) {
  const PipelineConfig cfg = flags.resolve();
  FeatureSet tr, va;
  std::string data_hash;
  if (!a.features.empty()) {
    tr = load_features(a.features);
    if (!a.val_features.empty()) va = load_features(a.val_features);
    data_hash = hex64(file_hash(a.features));
  } else {
    if (a.data.corpus_dir.empty() || a.data.manifests.empty())
      throw ConfigError("train needs --features or --corpus with --manifests");
    const Corpus corpus = load_corpus(a.data.corpus_dir, cfg.filterbank.sample_rate_hz);
    const auto all = read_manifests(a.data.manifests);
    tr = build_features(frames_for(manifests_in(all, Split::kTrain), corpus, cfg), cfg.context, cfg);
    va = build_features(frames_for(manifests_in(all, Split::kVal), corpus, cfg), cfg.context, cfg);
    data_hash = hex64(file_hash(a.data.manifests));
  }
  if (tr.context.tau1_frames != cfg.context.tau1_frames ||
      tr.context.tau2_frames != cfg.context.tau2_frames)
    throw ConfigError("feature file context (" + std::to_string(tr.context.tau1_frames) + ", " +
                      std::to_string(tr.context.tau2_frames) + ") differs from the configuration");
  std::cout << "training on " << tr.size() << " records, validating on " << va.size() << '\n';
  const TrainResult res = train(tr, va.size() ? &va : nullptr, cfg.train, cfg.topology,
                                [](const EpochLoss& e) {
                                  std::printf("epoch %3d  train_rmse %.6f  val_rmse %.6f\n",
                                              e.epoch, e.train_rmse, e.val_rmse);
                                  std::fflush(stdout);
                                });
  ensure_parent(a.model);
  save_model(res.params, a.model);
  snapshot(cfg, a.model);
  const fs::path loss = a.loss_csv.empty() ? fs::path(a.model).replace_extension(".loss.csv")
                                           : fs::path(a.loss_csv);
  ensure_parent(loss);
  write_loss_csv(res.history, loss);
  auto meta = base_meta("train", cfg);
  meta["data_hash"] = data_hash;
  meta["model_hash"] = hex64(file_hash(a.model));
  meta["train_records"] = tr.size();
  meta["val_records"] = va.size();
  meta["parameters"] = res.params.num_parameters();
  write_json(sidecar(a.model), meta);
  std::cout << "model: " << a.model << "\nloss: " << loss.string() << '\n';
  return 0;
}

// The configuration a model was trained with, unless the user gave one.
PipelineConfig config_for_model(ConfigFlags flags, const std::string& model) {
  fs::path snap = model;
  snap += ".config.json";
  if (flags.config_path.empty() && fs::exists(snap)) flags.config_path = snap.string();
  return flags.resolve();
}

// ---- enhance ----

struct EnhanceArgs {
  std::string model, input, output, trace;
};

int run_enhance(const ConfigFlags& flags, const EnhanceArgs& a) {
  const PipelineConfig cfg = config_for_model(flags, a.model);
  const NetworkParams model = load_model(a.model);
  const Signal x = read_wav_checked(a.input, cfg.filterbank.sample_rate_hz);
  const EnhanceResult r = enhance_stream(x, model, cfg);
  for (double v : r.output)
    if (!std::isfinite(v)) throw NumericError("non-finite output sample");
  Signal y = r.output;
  for (double& v : y) v = std::clamp(v, -1.0, 1.0);
  ensure_parent(a.output);
  write_wav(a.output, y, cfg.filterbank.sample_rate_hz);
  const fs::path trace = a.trace.empty() ? fs::path(a.output).replace_extension(".hagt")
                                         : fs::path(a.trace);
  ensure_parent(trace);
  save_gain_trace(r.trace, trace);
  snapshot(cfg, a.output);

  const double ms = 1000.0 * r.latency_samples / cfg.filterbank.sample_rate_hz;
  auto meta = base_meta("enhance", cfg);
  meta["model_hash"] = hex64(file_hash(a.model));
  meta["input"] = a.input;
  meta["latency_samples"] = r.latency_samples;
  meta["latency_ms"] = ms;
  meta["audio_seconds"] = static_cast<double>(x.size()) / cfg.filterbank.sample_rate_hz;
  meta["processing_seconds"] = r.seconds_elapsed;
  meta["realtime_factor"] = r.realtime_factor;
  meta["deterministic"] = false;  // timing fields vary between runs
  write_json(sidecar(a.output), meta);
  std::printf("latency_samples=%d latency_ms=%.3f\n", r.latency_samples, ms);
  std::printf("audio_seconds=%.3f processing_seconds=%.4f realtime_factor=%.4f\n",
              static_cast<double>(x.size()) / cfg.filterbank.sample_rate_hz, r.seconds_elapsed,
              r.realtime_factor);
  return 0;
}

// ---- evaluate ----

struct EvalArgs {
  DataArgs data;
  std::string model;
  std::string systems = "noisy,dnn,baseline,anchor,ideal_wiener";
  std::string split = "test";
  std::string out_dir;
};

int run_evaluate(const ConfigFlags& flags, const EvalArgs& a) {
  EvalOptions opt;
  opt.systems.clear();
  std::stringstream ss(a.systems);
  for (std::string tok; std::getline(ss, tok, ',');) opt.systems.push_back(system_from_string(tok));
  const bool needs_model =
      std::find(opt.systems.begin(), opt.systems.end(), System::kDnn) != opt.systems.end();
  if (needs_model && a.model.empty()) throw ConfigError("system 'dnn' requires --model");

  const PipelineConfig cfg = a.model.empty() ? flags.resolve() : config_for_model(flags, a.model);
  NetworkParams model;
  if (!a.model.empty()) {
    model = load_model(a.model);
    opt.model = &model;
  }
  const Corpus corpus = load_corpus(a.data.corpus_dir, cfg.filterbank.sample_rate_hz);
  const auto ms = manifests_in(read_manifests(a.data.manifests), parse_split(a.split));
  if (ms.empty()) throw DataError("no manifests in split '" + a.split + "'");

  const auto records = evaluate_systems(ms, corpus, cfg, opt);
  const fs::path out(a.out_dir);
  fs::create_directories(out);
  write_eval_csv(records, out / "eval.csv");
  const auto rows = summarize(records);
  write_summary_csv(rows, out / "summary.csv");
  snapshot(cfg, out / "eval.csv");

  auto meta = base_meta("evaluate", cfg);
  meta["manifest_hash"] = hex64(file_hash(a.data.manifests));
  meta["model_hash"] = a.model.empty() ? "" : hex64(file_hash(a.model));
  meta["split"] = a.split;
  meta["mixtures"] = ms.size();
  meta["sd_convention"] = "10 log10(sum |S - G S|^2 / sum |S|^2); more negative = less distortion";
  write_json(out / "eval.meta.json", meta);

  std::printf("%-14s %6s %8s %10s %8s %8s\n", "system", "snr", "n", "dSTOI_med", "NR_med", "SD_med");
  for (const auto& r : rows)
    std::printf("%-14s %6.1f %8zu %10.4f %8.2f %8.2f\n", r.system.c_str(), r.snr_db, r.count,
                r.delta_stoi.median, r.nr_db.median, r.sd_db.median);
  return 0;
}

// ---- sweep-context ----

struct SweepArgs {
  DataArgs data;
  std::string tau1_list = "2,10,50";
  std::string tau2_list;
  std::string out;
};

int run_sweep(const ConfigFlags& flags, const SweepArgs& a) {
  const PipelineConfig cfg = flags.resolve();
  const auto t1 = parse_int_list(a.tau1_list);
  const auto t2 = a.tau2_list.empty() ? std::vector<int>{cfg.context.tau2_frames}
                                      : parse_int_list(a.tau2_list);
  std::vector<std::pair<int, int>> pairs;
  for (int b : t2)
    for (int f : t1) pairs.emplace_back(f, b);
  if (cfg.deployment)
    for (int b : t2) check_latency_budget(cfg.filterbank, b);

  const Corpus corpus = load_corpus(a.data.corpus_dir, cfg.filterbank.sample_rate_hz);
  const auto all = read_manifests(a.data.manifests);
  const auto tr = frames_for(manifests_in(all, Split::kTrain), corpus, cfg);
  const auto va = frames_for(manifests_in(all, Split::kVal), corpus, cfg);
  if (va.empty()) throw DataError("context sweep needs validation mixtures");
  const auto points = context_sweep(tr, va, pairs, cfg);
  ensure_parent(a.out);
  write_sweep_csv(points, a.out, cfg.filterbank.hop_samples);
  snapshot(cfg, a.out);
  auto meta = base_meta("sweep-context", cfg);
  meta["manifest_hash"] = hex64(file_hash(a.data.manifests));
  meta["lookback_trend_holds"] = lookback_trend_holds(points);
  write_json(sidecar(a.out), meta);
  for (const auto& p : points)
    std::printf("tau1=%4d tau2=%2d records=%zu train_rmse=%.6f val_rmse=%.6f\n", p.tau1_frames,
                p.tau2_frames, p.train_records, p.final_train_rmse, p.final_val_rmse);
  std::printf("lookback_trend_holds=%s\n", lookback_trend_holds(points) ? "true" : "false");
  return 0;
}

// ---- fbank-check ----

struct FbankArgs {
  int signals = 100;
  int length = 4800;
  int window_len = 0;
  int hop = 0;
  std::string out;
};

int run_fbank_check(const ConfigFlags& flags, const FbankArgs& a) {
  PipelineConfig cfg = flags.resolve();
  if (a.window_len) cfg.filterbank.window_len_samples = a.window_len;
  if (a.hop) cfg.filterbank.hop_samples = a.hop;
  cfg.filterbank.validate();
  const FilterbankConfig& fb = cfg.filterbank;
  if (a.signals < 1 || a.length <= fb.window_len_samples)
    throw ConfigError("need at least one signal longer than the window");

  const int delay = group_delay(fb);
  std::mt19937_64 rng(cfg.mix.seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = -1e300;
  std::ostringstream csv;
  csv << "signal,length,error_db\n";
  csv.precision(10);
  for (int i = 0; i < a.signals; ++i) {
    Signal x(a.length);
    for (double& v : x) v = u(rng);
    const Signal y = synthesize(analyze(x, fb), fb);
    double e = 0.0, r = 0.0;
    for (int t = 0; t + delay < static_cast<int>(y.size()) && t < a.length; ++t) {
      e += (y[t + delay] - x[t]) * (y[t + delay] - x[t]);
      r += x[t] * x[t];
    }
    const double db = e > 0.0 ? 10.0 * std::log10(e / r) : -400.0;
    worst = std::max(worst, db);
    csv << i << ',' << a.length << ',' << db << '\n';
  }
  if (!a.out.empty()) {
    ensure_parent(a.out);
    std::ofstream os(a.out);
    if (!os) throw DataError("cannot write " + a.out);
    os << csv.str();
  }
  const int total = delay + cfg.context.tau2_frames * fb.hop_samples;
  const bool delay_ok = delay <= kFilterbankDelayLimit;
  const bool latency_ok = total <= kLatencyBudget;
  const bool recon_ok = worst <= -40.0;
  std::printf("filterbank L=%d R=%d N=%d bands=%d spacing_hz=%.1f\n", fb.window_len_samples,
              fb.hop_samples, fb.dft_size(), fb.num_bands, fb.band_spacing_hz());
  std::printf("group_delay_samples=%d (limit %d) %s\n", delay, kFilterbankDelayLimit,
              delay_ok ? "ok" : "EXCEEDED");
  std::printf("total_latency_samples=%d (tau2=%d, limit %d) %s\n", total, cfg.context.tau2_frames,
              kLatencyBudget, latency_ok ? "ok" : "EXCEEDED");
  std::printf("worst_reconstruction_db=%.2f over %d signals %s\n", worst, a.signals,
              recon_ok ? "ok" : "FAILED");
  if (!delay_ok || !latency_ok) return static_cast<int>(ExitCode::kConfig);
  if (!recon_ok) return static_cast<int>(ExitCode::kNumeric);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hanr: low-latency DNN noise reduction toolkit"};
  app.require_subcommand(1);

  ConfigFlags flags_mix, flags_feat, flags_train, flags_enh, flags_eval, flags_sweep, flags_fb;

  auto* mix = app.add_subcommand("mix", "synthesize or load a corpus and write mixture manifests");
  flags_mix.add(*mix);
  MixArgs mix_args;
  mix->add_option("--corpus", mix_args.corpus_dir, "corpus directory (speech/, noise/)");
  mix->add_option("--out", mix_args.out_dir, "output directory")->required();
  mix->add_flag("--synth", mix_args.synth, "generate the built-in synthetic corpus first");
  mix->add_flag("--no-audio", mix_args.no_audio, "skip writing x/s/n wav files");

  auto* feat = app.add_subcommand("features", "extract a training feature dump");
  flags_feat.add(*feat);
  DataArgs feat_data;
  std::string feat_split = "train", feat_out;
  add_data_args(*feat, feat_data);
  feat->add_option("--split", feat_split, "train | val | test");
  feat->add_option("--out", feat_out, "output .hadf file")->required();

  auto* tr = app.add_subcommand("train", "train the gain network");
  flags_train.add(*tr);
  TrainArgs tr_args;
  tr->add_option("--corpus", tr_args.data.corpus_dir);
  tr->add_option("--manifests", tr_args.data.manifests);
  tr->add_option("--features", tr_args.features, "training .hadf (instead of corpus+manifests)");
  tr->add_option("--val-features", tr_args.val_features);
  tr->add_option("--model", tr_args.model, "output model file")->required();
  tr->add_option("--loss-csv", tr_args.loss_csv);

  auto* enh = app.add_subcommand("enhance", "enhance a wav file with a trained model");
  flags_enh.add(*enh);
  EnhanceArgs enh_args;
  enh->add_option("--model", enh_args.model)->required()->check(CLI::ExistingFile);
  enh->add_option("--input", enh_args.input)->required()->check(CLI::ExistingFile);
  enh->add_option("--output", enh_args.output)->required();
  enh->add_option("--trace", enh_args.trace, "gain trace output (.hagt)");

  auto* ev = app.add_subcommand("evaluate", "score systems on held-out mixtures");
  flags_eval.add(*ev);
  EvalArgs ev_args;
  add_data_args(*ev, ev_args.data);
  ev->add_option("--model", ev_args.model);
  ev->add_option("--systems", ev_args.systems, "comma-separated system list");
  ev->add_option("--split", ev_args.split);
  ev->add_option("--out", ev_args.out_dir, "output directory")->required();

  auto* sw = app.add_subcommand("sweep-context", "validation RMSE versus context length");
  flags_sweep.add(*sw);
  SweepArgs sw_args;
  add_data_args(*sw, sw_args.data);
  sw->add_option("--tau1-list", sw_args.tau1_list, "comma-separated look-back frames");
  sw->add_option("--tau2-list", sw_args.tau2_list, "comma-separated lookahead frames");
  sw->add_option("--out", sw_args.out, "output CSV")->required();

  auto* fbc = app.add_subcommand("fbank-check", "filter bank reconstruction and latency check");
  flags_fb.add(*fbc);
  FbankArgs fb_args;
  fbc->add_option("--signals", fb_args.signals);
  fbc->add_option("--length", fb_args.length);
  fbc->add_option("--window-len", fb_args.window_len);
  fbc->add_option("--hop", fb_args.hop);
  fbc->add_option("--out", fb_args.out, "per-signal CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (*mix) return run_mix(flags_mix, mix_args);
    if (*feat) return run_features(flags_feat, feat_data, feat_split, feat_out);
    if (*tr) return run_train(flags_train, tr_args);
    if (*enh) return run_enhance(flags_enh, enh_args);
    if (*ev) return run_evaluate(flags_eval, ev_args);
    if (*sw) return run_sweep(flags_sweep, sw_args);
    if (*fbc) return run_fbank_check(flags_fb, fb_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return static_cast<int>(ExitCode::kNumeric);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  }
  return 0;
}
