#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "hanr/error.hpp"
#include "hanr/filterbank.hpp"
#include "oracles.hpp"

using namespace hanr;

namespace {

double band_energy(const SubbandFrame& f, int lo, int hi) {
  double e = 0.0;
  for (int b = lo; b <= hi; ++b) e += std::norm(f.bins[b]);
  return e;
}

// Round-trip error power relative to the input, after delay compensation and
// excluding window-length edges.
double round_trip_error_db(const Signal& x, const FilterbankConfig& cfg) {
  const int delay = cfg.window_len_samples - 1;
  Signal padded = x;
  padded.resize(x.size() + 2 * cfg.window_len_samples, 0.0);
  const Signal y = synthesize(analyze(padded, cfg), cfg);
  double err = 0.0, ref = 0.0;
  for (std::size_t t = cfg.window_len_samples; t + cfg.window_len_samples < x.size(); ++t) {
    const double d = y[t + delay] - x[t];
    err += d * d;
    ref += x[t] * x[t];
  }
  return 10.0 * std::log10(err / ref + 1e-300);
}

}  // namespace

TEST_CASE("default configuration covers 48 bands at 250 Hz spacing") {
  FilterbankConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.dft_size() == 96);
  CHECK(cfg.band_spacing_hz() == doctest::Approx(250.0));
  CHECK(cfg.num_bands * cfg.band_spacing_hz() == doctest::Approx(cfg.sample_rate_hz / 2.0));
  CHECK(cfg.warmup_frames() == 4);
}

TEST_CASE("all-zero input gives all-zero frames") {
  FilterbankConfig cfg;
  const auto frames = analyze(Signal(10 * 24, 0.0), cfg);
  REQUIRE(frames.size() == 10);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    CHECK(frames[k].index == static_cast<std::int64_t>(k));
    CHECK(frames[k].bins.size() == 49);
    for (const auto& b : frames[k].bins) CHECK(std::abs(b) == 0.0);
  }
}

TEST_CASE("impulse response matches direct windowed DFT") {
  FilterbankConfig cfg;
  Signal x(10 * 24, 0.0);
  x[0] = 1.0;
  const auto frames = analyze(x, cfg);
  for (int k = 0; k < 10; ++k) {
    const auto seg = oracle::windowed_segment(x, k, 24, 96);
    double e_oracle = 0.0;
    for (int b = 0; b <= 48; ++b) {
      const auto ref = oracle::dft_bin(seg, b, 96);
      CHECK(std::abs(frames[k].bins[b] - ref) < 1e-12);
      e_oracle += std::norm(ref);
    }
    CHECK(band_energy(frames[k], 0, 48) == doctest::Approx(e_oracle).epsilon(1e-12));
  }
  // The impulse sits at segment position 96 - 24 (k + 1): energy traces the
  // prototype, 49 * w^2 over the one-sided bins.
  for (int k = 0; k < 4; ++k) {
    const double w = oracle::sqrt_hann(96 - 24 * (k + 1), 96);
    CHECK(band_energy(frames[k], 0, 48) == doctest::Approx(49.0 * w * w).epsilon(1e-12));
  }
  CHECK(band_energy(frames[5], 0, 48) == 0.0);
}

TEST_CASE("1 kHz tone concentrates in band 4") {
  FilterbankConfig cfg;
  Signal x(48 * 24);
  for (std::size_t t = 0; t < x.size(); ++t)
    x[t] = std::sin(2.0 * std::numbers::pi * 1000.0 * t / 24000.0 + 0.3);
  const auto frames = analyze(x, cfg);
  for (int k = 8; k < 48; ++k) {
    const auto seg = oracle::windowed_segment(x, k, 24, 96);
    for (int b = 0; b <= 48; ++b)
      CHECK(std::abs(frames[k].bins[b] - oracle::dft_bin(seg, b, 96)) < 1e-9);
    const double total = band_energy(frames[k], 0, 48);
    int argmax = 0;
    for (int b = 1; b <= 48; ++b)
      if (std::norm(frames[k].bins[b]) > std::norm(frames[k].bins[argmax])) argmax = b;
    CHECK(argmax == 4);
    // sqrt-Hann main lobe spans bins 3..5; bin 4 alone holds about 81 %.
    CHECK(std::norm(frames[k].bins[4]) / total >= 0.80);
    CHECK(band_energy(frames[k], 3, 5) / total >= 0.95);
  }
}

TEST_CASE("synthesis of zeros is silent") {
  FilterbankConfig cfg;
  std::vector<SubbandFrame> frames(8);
  for (auto& f : frames) f.bins.assign(49, Complex{});
  for (double v : synthesize(frames, cfg)) CHECK(v == 0.0);
}

TEST_CASE("single bin synthesis is a windowed modulated tone") {
  FilterbankConfig cfg;
  std::vector<SubbandFrame> frames(6);
  for (auto& f : frames) f.bins.assign(49, Complex{});
  frames[0].bins[4] = 1.0;
  const Signal y = synthesize(frames, cfg);
  // Dual window of sqrt-Hann with 4x overlap is w / 2; the real inverse of a
  // single positive-frequency bin is (2 / N) cos(2 pi 4 j / N).
  for (std::size_t t = 0; t < y.size(); ++t) {
    const long j = static_cast<long>(t) - 23;
    double expect = 0.0;
    if (j >= 0 && j < 96)
      expect = 0.5 * oracle::sqrt_hann(j, 96) * (2.0 / 96.0) *
               std::cos(2.0 * std::numbers::pi * 4.0 * j / 96.0);
    CHECK(std::abs(y[t] - expect) < 1e-14);
  }
}

TEST_CASE("round trip reconstructs white noise below -40 dB") {
  FilterbankConfig cfg;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Signal x = oracle::random_signal(2400 + 7 * seed, seed);
    CHECK(round_trip_error_db(x, cfg) <= -40.0);
  }
}

TEST_CASE("analysis is linear") {
  FilterbankConfig cfg;
  const Signal x = oracle::random_signal(2400, 11);
  const Signal y = oracle::random_signal(2400, 12);
  const double a = 0.7, b = -1.9;
  Signal z(x.size());
  for (std::size_t t = 0; t < z.size(); ++t) z[t] = a * x[t] + b * y[t];
  const auto fx = analyze(x, cfg), fy = analyze(y, cfg), fz = analyze(z, cfg);
  for (std::size_t k = 0; k < fz.size(); ++k)
    for (int f = 0; f <= 48; ++f) {
      const Complex lin = a * fx[k].bins[f] + b * fy[k].bins[f];
      CHECK(std::abs(fz[k].bins[f] - lin) <= 1e-9 * (std::abs(lin) + 1e-9));
    }
}

TEST_CASE("frame k does not depend on samples past k*hop + window_len") {
  FilterbankConfig cfg;
  Signal x = oracle::random_signal(2400, 5);
  const int k = 40;
  Signal y = x;
  for (std::size_t t = k * 24 + 96; t < y.size(); ++t) y[t] += 1.0;
  const auto fx = analyze(x, cfg), fy = analyze(y, cfg);
  for (int i = 0; i <= k; ++i)
    for (int f = 0; f <= 48; ++f) CHECK(fx[i].bins[f] == fy[i].bins[f]);
}

TEST_CASE("group delay") {
  FilterbankConfig cfg;
  CHECK(group_delay(cfg) == 95);
  CHECK(check_latency_budget(cfg, 2) == 95 + 48);
  CHECK(check_latency_budget(cfg, 2) <= 192);

  FilterbankConfig longer = cfg;
  longer.window_len_samples = 192;
  CHECK(group_delay(longer) == 191);
  CHECK_THROWS_AS(check_latency_budget(longer, 0), ConfigError);

  FilterbankConfig block = cfg;
  block.window_len_samples = 24;
  block.window_kind = WindowKind::kCustomPrototype;
  block.custom_prototype.assign(24, 1.0);
  CHECK(group_delay(block) == 23);
  const Signal x = oracle::random_signal(960, 3);
  const Signal y = synthesize(analyze(x, block), block);
  for (std::size_t t = 0; t + 23 < x.size(); ++t) CHECK(y[t + 23] == doctest::Approx(x[t]).epsilon(1e-12));
}

TEST_CASE("configuration and input errors") {
  FilterbankConfig bad_rate;
  bad_rate.sample_rate_hz = 16000;
  CHECK_THROWS_AS(Analyzer{bad_rate}, ConfigError);
  FilterbankConfig bad_hop;
  bad_hop.hop_samples = 25;
  CHECK_THROWS_AS(bad_hop.validate(), ConfigError);

  FilterbankConfig cfg;
  Signal x(48, 0.0);
  x[30] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(analyze(x, cfg), DataError);

  std::vector<SubbandFrame> frames(1);
  frames[0].bins.assign(40, Complex{});
  CHECK_THROWS_AS(synthesize(frames, cfg), ConfigError);
}

TEST_CASE("streaming analysis matches whole-signal analysis") {
  FilterbankConfig cfg;
  const Signal x = oracle::random_signal(24 * 30, 9);
  const auto whole = analyze(x, cfg);
  Analyzer an(cfg);
  Synthesizer syn(cfg);
  std::vector<double> out;
  for (int k = 0; k < 30; ++k) {
    const auto f = an.push(std::span<const double>(x.data() + 24 * k, 24));
    for (int b = 0; b <= 48; ++b) CHECK(f.bins[b] == whole[k].bins[b]);
    syn.push(f, out);
    CHECK(out.size() == static_cast<std::size_t>(24 * (k + 1)));
  }
}
