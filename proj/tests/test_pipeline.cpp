#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "hanr/error.hpp"
#include "hanr/pipeline.hpp"
#include "oracles.hpp"

using namespace hanr;

namespace {

PipelineConfig small_config() {
  PipelineConfig c = PipelineConfig::preset(Profile::kDeskScale);
  c.context.tau1_frames = 8;
  c.topology.hidden_width = 32;
  c.resolve();
  return c;
}

// Zero weights and a saturated output bias: gain exactly 1 everywhere.
NetworkParams unity_model(const PipelineConfig& cfg) {
  NetworkParams p = zero_params(cfg.topology);
  p.layers.back().bias.setConstant(100.0f);
  return p;
}

double error_db(std::span<const double> ref, std::span<const double> y) {
  double e = 0.0, r = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    e += (y[i] - ref[i]) * (y[i] - ref[i]);
    r += ref[i] * ref[i];
  }
  return 10.0 * std::log10(e / r);
}

const Corpus& corpus() {
  static const Corpus c = make_synthetic_corpus({10, 10, 3.0, 6.0, 17});
  return c;
}

}  // namespace

TEST_CASE("presets") {
  const auto desk = PipelineConfig::preset(Profile::kDeskScale);
  CHECK(desk.context.tau1_frames == 30);
  CHECK(desk.topology.hidden_width == 256);
  CHECK(desk.topology.input_dim == 33 * 48 + 96);
  desk.validate();
  CHECK(desk.total_latency_samples() == 143);
  CHECK(desk.total_latency_samples() <= kLatencyBudget);

  const auto heavy = PipelineConfig::preset(Profile::kPaperScale);
  CHECK(heavy.topology.input_dim == 9840);
  CHECK(heavy.topology.hidden_width == 2048);
  CHECK(heavy.train.learning_rate == 1e-5);
  heavy.validate();
}

TEST_CASE("config validation") {
  auto c = PipelineConfig::preset(Profile::kDeskScale);
  c.context.tau2_frames = 3;
  c.resolve();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.deployment = false;
  c.validate();

  auto d = PipelineConfig::preset(Profile::kDeskScale);
  d.topology.input_dim += 1;
  CHECK_THROWS_AS(d.validate(), ConfigError);

  auto e = PipelineConfig::preset(Profile::kDeskScale);
  e.filterbank.window_len_samples = 192;
  CHECK_THROWS_AS(e.validate(), ConfigError);
  CHECK_THROWS_AS(profile_from_string("laptop"), ConfigError);
}

TEST_CASE("config json round trip") {
  auto c = PipelineConfig::preset(Profile::kDeskScale);
  c.context.tau1_frames = 12;
  c.baseline.alpha = 0.9;
  c.baseline.inc_per_frame = MinTrackConfig::inc_from_db_per_s(3.0);
  c.anchor.window_frames = 30;
  c.mix.snr_set_db = {0.0, 5.0};
  c.train.rng_seed = 1234;
  c.resolve();
  const auto back = PipelineConfig::from_json(c.to_json());
  CHECK(back.to_json().dump() == c.to_json().dump());
  CHECK(back.hash() == c.hash());
  CHECK(back.topology.input_dim == 15 * 48 + 96);
  CHECK(back.baseline.inc_db_per_s() == doctest::Approx(3.0));

  const auto path = std::filesystem::temp_directory_path() / "hanr_cfg.json";
  save_config(c, path);
  CHECK(load_config(path).hash() == c.hash());
  {
    std::ofstream os(path);
    os << "{\"context\": {\"tau1_frames\": \"many\"}}";
  }
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("unity-gain network reproduces the delayed input") {
  const auto cfg = small_config();
  const auto model = unity_model(cfg);
  const Signal x = oracle::random_signal(24000, 3);
  const auto r = enhance_stream(x, model, cfg);
  REQUIRE(r.output.size() == x.size());
  CHECK(r.latency_samples == 143);
  const std::size_t d = r.latency_samples, n = x.size() - d;
  const double e = error_db(std::span<const double>(x.data(), n),
                            std::span<const double>(r.output.data() + d, n));
  MESSAGE("identity chain error " << e << " dB");
  CHECK(e <= -40.0);
  CHECK(r.trace.size() > 900);
  CHECK(r.realtime_factor > 0.0);
}

TEST_CASE("reported latency equals the measured impulse latency") {
  for (int tau2 : {0, 1, 2}) {
    auto cfg = small_config();
    cfg.context.tau2_frames = tau2;
    cfg.resolve();
    const auto model = unity_model(cfg);
    Signal x(4800, 0.0);
    const std::size_t t0 = 2000;
    x[t0] = 1.0;
    const auto r = enhance_stream(x, model, cfg);
    const auto peak = std::max_element(r.output.begin(), r.output.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
    const int measured = static_cast<int>(peak - r.output.begin()) - static_cast<int>(t0);
    CHECK(measured == r.latency_samples);
    CHECK(measured == 95 + 24 * tau2);
    CHECK(measured <= kLatencyBudget);
  }
}

TEST_CASE("silence in, silence out; output stays finite") {
  const auto cfg = small_config();
  const auto model = init_params(cfg.topology, 4);
  const auto r = enhance_stream(Signal(6000, 0.0), model, cfg);
  for (double v : r.output) CHECK(v == 0.0);

  Signal loud = oracle::random_signal(6000, 9, 0.99);
  const auto q = enhance_stream(loud, model, cfg);
  for (double v : q.output) CHECK(std::isfinite(v));
  for (const auto& g : q.trace.gains)
    for (double v : g) {
      CHECK(v >= gain_floor(14.0) - 1e-7);
      CHECK(v <= 1.0);
    }
}

TEST_CASE("model and context must agree") {
  const auto cfg = small_config();
  auto other = cfg;
  other.context.tau1_frames = 9;
  other.resolve();
  const auto model = zero_params(other.topology);
  CHECK_THROWS_AS(enhance_stream(Signal(480, 0.0), model, cfg), ConfigError);
}

TEST_CASE("feature extraction") {
  auto cfg = small_config();
  const auto split = split_corpus(corpus().speech_ids(), corpus().noise_ids(), {}, 1);
  MixConfig mc;
  mc.mixtures_train = 2;
  mc.mixtures_val = 1;
  mc.mixtures_test = 1;
  const auto ms = generate_manifests(corpus(), split, mc);
  const auto mx = analyze_mixture(ms[0], realize(ms[0], corpus()), cfg);
  CHECK(mx.frames == 3000);
  CHECK(mx.logpow.size() == 3000u * 48);

  cfg.feature_stride = 1;
  const std::vector<MixtureFrames> one{mx};
  const auto all = build_features(one, cfg.context, cfg);
  // Centers run from tau1 up to frames - 1 - tau2.
  CHECK(all.size() == static_cast<std::size_t>(3000 - 2 - 8));
  cfg.feature_stride = 4;
  const auto some = build_features(one, cfg.context, cfg);
  CHECK(some.size() == (all.size() + 3) / 4);
  const auto late = build_features(one, cfg.context, cfg, 100);
  CHECK(late.size() == static_cast<std::size_t>((2997 - 100) / 4 + 1));
  for (std::size_t i = 0; i < some.size(); ++i)
    for (float g : some.target(i)) {
      CHECK(g >= static_cast<float>(gain_floor(14.0)) - 1e-6f);
      CHECK(g <= 1.0f);
    }
}

TEST_CASE("system evaluation") {
  const auto cfg = small_config();
  const auto split = split_corpus(corpus().speech_ids(), corpus().noise_ids(), {}, 2);
  MixConfig mc;
  mc.snr_set_db = {0.0};
  mc.level_set_db = {0.0};
  mc.mixtures_train = 1;
  mc.mixtures_val = 1;
  mc.mixtures_test = 3;
  auto ms = generate_manifests(corpus(), split, mc);
  std::erase_if(ms, [](const MixManifest& m) { return m.split != Split::kTest; });
  REQUIRE(ms.size() == 3);

  EvalOptions opt;
  opt.systems = {System::kNoisy, System::kBaseline, System::kAnchor, System::kIdealWiener};
  CHECK_THROWS_AS(evaluate_systems(ms, corpus(), cfg, EvalOptions{}), ConfigError);
  const auto recs = evaluate_systems(ms, corpus(), cfg, opt);
  REQUIRE(recs.size() == 12);
  for (std::size_t i = 0; i < recs.size(); i += 4) {
    const auto &noisy = recs[i], &base = recs[i + 1], &anch = recs[i + 2], &ideal = recs[i + 3];
    CHECK(noisy.delta_stoi == 0.0);
    CHECK(noisy.nr_db == 0.0);
    CHECK(ideal.delta_stoi > base.delta_stoi);
    CHECK(anch.sd_db > base.sd_db);
    for (const auto* r : {&base, &anch, &ideal}) CHECK(r->nr_db > 0.0);
  }

  const auto path = std::filesystem::temp_directory_path() / "hanr_eval.csv";
  write_eval_csv(recs, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "mixture_id,snr_db,system,stoi,delta_stoi,nr_db,sd_db");
  std::filesystem::remove(path);
}

TEST_CASE("briefly trained network reduces noise on a held-out mixture") {
  auto cfg = small_config();
  cfg.train.epochs = 2;
  cfg.train.learning_rate = 1e-3;
  const auto split = split_corpus(corpus().speech_ids(), corpus().noise_ids(), {}, 3);
  MixConfig mc;
  mc.mixtures_train = 4;
  mc.mixtures_val = 1;
  mc.mixtures_test = 1;
  const auto ms = generate_manifests(corpus(), split, mc);
  std::vector<MixtureFrames> train_mx;
  const MixManifest* test = nullptr;
  for (const auto& m : ms) {
    if (m.split == Split::kTrain) train_mx.push_back(analyze_mixture(m, realize(m, corpus()), cfg));
    if (m.split == Split::kTest) test = &m;
  }
  REQUIRE(test);
  const auto set = build_features(train_mx, cfg.context, cfg);
  const auto res = train(set, nullptr, cfg.train, cfg.topology);
  EvalOptions opt;
  opt.systems = {System::kDnn};
  opt.model = &res.params;
  const auto recs = evaluate_mixture(*test, realize(*test, corpus()), cfg, opt);
  MESSAGE("held-out NR " << recs[0].nr_db << " dB, SD " << recs[0].sd_db << " dB");
  CHECK(recs[0].nr_db > 0.0);
}

TEST_CASE("sweep helpers") {
  std::vector<SweepPoint> pts{{2, 0, 0, 0.20, 1}, {10, 0, 0, 0.18, 1}, {50, 0, 0, 0.17, 1},
                              {2, 2, 0, 0.19, 1}, {50, 2, 0, 0.16, 1}};
  CHECK(lookback_trend_holds(pts));
  pts[2].final_val_rmse = 0.19;
  CHECK_FALSE(lookback_trend_holds(pts));

  auto cfg = small_config();
  cfg.train.epochs = 1;
  cfg.topology.hidden_width = 8;
  const auto split = split_corpus(corpus().speech_ids(), corpus().noise_ids(), {}, 4);
  MixConfig mc;
  mc.mixtures_train = 2;
  mc.mixtures_val = 1;
  mc.mixtures_test = 1;
  std::vector<MixtureFrames> tr, va;
  for (const auto& m : generate_manifests(corpus(), split, mc)) {
    if (m.split == Split::kTrain) tr.push_back(analyze_mixture(m, realize(m, corpus()), cfg));
    if (m.split == Split::kVal) va.push_back(analyze_mixture(m, realize(m, corpus()), cfg));
  }
  const auto sweep = context_sweep(tr, va, {{2, 0}, {2, 0}, {6, 1}}, cfg);
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[0].final_val_rmse == sweep[1].final_val_rmse);
  CHECK(sweep[0].final_train_rmse == sweep[1].final_train_rmse);
  CHECK(sweep[0].train_records == sweep[2].train_records);

  const auto path = std::filesystem::temp_directory_path() / "hanr_sweep.csv";
  write_sweep_csv(sweep, path);
  std::ifstream is(path);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(header == "tau1_frames,tau2_frames,tau1_ms,tau2_ms,train_records,final_train_rmse,final_val_rmse");
  CHECK(row.rfind("2,0,2,0,", 0) == 0);
  std::filesystem::remove(path);
}
