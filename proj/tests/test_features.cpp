#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hanr/error.hpp"
#include "hanr/features.hpp"
#include "oracles.hpp"

using namespace hanr;

namespace {

SubbandFrame frame_with(std::int64_t index, Complex v) {
  SubbandFrame f;
  f.index = index;
  f.bins.assign(49, v);
  return f;
}

}  // namespace

TEST_CASE("log power") {
  auto f = frame_with(0, 1.0);
  f.bins[1] = std::sqrt(std::exp(1.0));
  f.bins[2] = 0.0;
  f.bins[3] = Complex(0.0, std::sqrt(std::exp(1.0)));
  const auto lp = log_power(f);
  REQUIRE(lp.size() == 48);
  CHECK(lp[0] == 0.0);
  CHECK(lp[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lp[2] == doctest::Approx(std::log(1e-12)));
  CHECK(lp[2] == doctest::Approx(-27.631021115928547));
  CHECK(lp[3] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("context buffer warm-up and centring") {
  SUBCASE("tau1 = 2, tau2 = 1") {
    ContextBuffer buf({2, 1, 48});
    for (int k = 0; k < 3; ++k) CHECK_FALSE(buf.push(frame_with(k, 1.0)).has_value());
    const auto w = buf.push(frame_with(3, 1.0));
    REQUIRE(w.has_value());
    CHECK(w->center_frame_index == 2);
    CHECK(w->frames == 4);
  }
  SUBCASE("tau1 = tau2 = 0 has no delay") {
    ContextBuffer buf({0, 0, 48});
    for (int k = 0; k < 5; ++k) {
      const auto w = buf.push(frame_with(k, 2.0));
      REQUIRE(w.has_value());
      CHECK(w->center_frame_index == k);
      CHECK(w->frames == 1);
    }
  }
  SUBCASE("tau1 = 200, tau2 = 2") {
    ContextBuffer buf({200, 2, 48});
    int first = -1;
    for (int k = 0; k < 210 && first < 0; ++k)
      if (auto w = buf.push(frame_with(k, 1.0))) {
        first = k;
        CHECK(w->center_frame_index == 200);
      }
    CHECK(first + 1 == 203);  // pushes needed
  }
  SUBCASE("out-of-order frame is rejected") {
    ContextBuffer buf({2, 1, 48});
    buf.push(frame_with(0, 1.0));
    CHECK_THROWS_AS(buf.push(frame_with(2, 1.0)), DataError);
  }
}

TEST_CASE("window rows are chronological and only use frames up to k + tau2") {
  ContextBuffer buf({3, 2, 48});
  std::vector<double> row(48);
  for (int k = 0; k < 20; ++k) {
    for (int f = 0; f < 48; ++f) row[f] = 100.0 * k + f;
    const auto w = buf.push(k, row);
    if (!w) continue;
    // Mean removal is per band, so row differences recover frame order.
    for (int t = 1; t < w->frames; ++t) CHECK(w->at(t, 0) - w->at(t - 1, 0) == doctest::Approx(100.0));
    const double newest = w->at(w->frames - 1, 0) + w->mu[0];
    CHECK(newest == doctest::Approx(100.0 * (w->center_frame_index + 2)));
  }
}

TEST_CASE("normalize") {
  SUBCASE("constant window") {
    std::vector<double> raw(5 * 48, -3.5);
    const auto w = normalize(raw, 5, 48);
    for (double v : w.logpow) CHECK(v == 0.0);
    for (double v : w.mu) CHECK(v == -3.5);
    for (double v : w.sigma) CHECK(v == 0.0);
  }
  SUBCASE("random 3x2 window against two-pass oracle") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 3.0);
    std::vector<double> raw(6);
    for (double& v : raw) v = g(rng);
    const auto w = normalize(raw, 3, 2);
    for (int f = 0; f < 2; ++f) {
      double mean, sd;
      oracle::mean_std(raw, 3, 2, f, mean, sd);
      CHECK(std::abs(w.mu[f] - mean) < 1e-12);
      CHECK(std::abs(w.sigma[f] - sd) < 1e-12);
      for (int t = 0; t < 3; ++t) CHECK(std::abs(w.at(t, f) - (raw[t * 2 + f] - mean)) < 1e-12);
      double colsum = 0.0;
      for (int t = 0; t < 3; ++t) colsum += w.at(t, f);
      CHECK(std::abs(colsum / 3) < 1e-9);
    }
  }
}

TEST_CASE("scaling the waveform shifts only mu") {
  const Signal x = oracle::random_signal(24 * 60, 21);
  const double a = 3.7;
  Signal y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i];
  FilterbankConfig fb;
  ContextBuffer bx({6, 1, 48}), by({6, 1, 48});
  const auto fx = analyze(x, fb), fy = analyze(y, fb);
  int windows = 0;
  for (std::size_t k = 0; k < fx.size(); ++k) {
    const auto wx = bx.push(fx[k]);
    const auto wy = by.push(fy[k]);
    if (!wx) continue;
    ++windows;
    const auto vx = assemble_input(*wx), vy = assemble_input(*wy);
    const std::size_t nwin = 8 * 48;
    for (std::size_t i = 0; i < vx.size(); ++i) {
      if (i >= nwin && i < nwin + 48)
        CHECK(std::abs(vy[i] - vx[i] - 2.0 * std::log(a)) < 1e-9);
      else
        CHECK(std::abs(vy[i] - vx[i]) < 1e-6);
    }
  }
  CHECK(windows > 40);
}

TEST_CASE("assemble_input layout") {
  CHECK(ContextConfig{200, 2, 48}.feature_dim() == 9840);
  CHECK(ContextConfig{0, 0, 48}.feature_dim() == 144);

  std::vector<double> raw(48, 0.0);
  const auto w = normalize(raw, 1, 48);
  const auto v = assemble_input(w);
  CHECK(v.size() == 144);
  for (double e : v) CHECK(e == 0.0);

  std::vector<double> two(2 * 48);
  for (int t = 0; t < 2; ++t)
    for (int f = 0; f < 48; ++f) two[t * 48 + f] = (t == 0 ? 1.0 : 3.0) * (f + 1);
  const auto v2 = assemble_input(normalize(two, 2, 48));
  CHECK(v2.size() == 2 * 48 + 96);
  CHECK(v2[0] == doctest::Approx(-1.0));      // oldest frame first
  CHECK(v2[48] == doctest::Approx(1.0));
  CHECK(v2[96] == doctest::Approx(2.0));      // mu, band 0
  CHECK(v2[96 + 48] == doctest::Approx(1.0)); // sigma, band 0
}

TEST_CASE("feature dump round trip and truncation") {
  FeatureSet set;
  set.context = {1, 1, 48};
  std::vector<double> in(set.input_dim()), tgt(48);
  for (int r = 0; r < 3; ++r) {
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = 0.25 * r + i * 1e-3;
    for (std::size_t i = 0; i < tgt.size(); ++i) tgt[i] = 0.5 + 0.001 * i;
    set.append(in, tgt);
  }
  const auto path = std::filesystem::temp_directory_path() / "hanr_features_test.hadf";
  save_features(set, path);
  const FeatureSet back = load_features(path);
  CHECK(back.context.tau1_frames == 1);
  CHECK(back.size() == 3);
  CHECK(back.inputs == set.inputs);
  CHECK(back.targets == set.targets);

  {
    std::ifstream is(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), {});
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 6));
  }
  CHECK_THROWS_AS(load_features(path), DataError);
  std::filesystem::remove(path);
}
