#include "hanr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

#include "hanr/binio.hpp"
#include "hanr/dataset.hpp"
#include "hanr/dft.hpp"
#include "hanr/error.hpp"
#include "hanr/resample.hpp"

namespace hanr {
namespace {

constexpr int kStoiRate = 10000;
constexpr int kFrameLen = 256;
constexpr int kHop = 128;
constexpr int kFftSize = 512;
constexpr int kNumThirdOct = 15;
constexpr double kMinFreq = 150.0;
constexpr int kSegment = 30;
constexpr double kBetaDb = -15.0;
constexpr double kDynRangeDb = 40.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Hann of length n + 2 without its zero end points.
std::vector<double> inner_hann(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 1) / (n + 1));
  return w;
}

// Drops frames of both signals whose clean energy is more than the dynamic
// range below the loudest clean frame, then overlap-adds what remains.
void remove_silent_frames(std::span<const double> x, std::span<const double> y,
                          Signal& x_out, Signal& y_out) {
  const auto w = inner_hann(kFrameLen);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i + kFrameLen < x.size(); i += kHop) starts.push_back(i);
  if (starts.empty()) throw DataError("signal too short for intelligibility analysis");

  std::vector<double> energy_db(starts.size());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    double e = 0.0;
    for (int j = 0; j < kFrameLen; ++j) {
      const double v = w[j] * x[starts[k] + j];
      e += v * v;
    }
    energy_db[k] = 20.0 * std::log10(std::sqrt(e) + kEps);
  }
  const double peak = *std::max_element(energy_db.begin(), energy_db.end());
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < starts.size(); ++k)
    if (peak - kDynRangeDb - energy_db[k] < 0.0) keep.push_back(starts[k]);

  const std::size_t len = (keep.size() - 1) * kHop + kFrameLen;
  x_out.assign(len, 0.0);
  y_out.assign(len, 0.0);
  for (std::size_t k = 0; k < keep.size(); ++k)
    for (int j = 0; j < kFrameLen; ++j) {
      x_out[k * kHop + j] += w[j] * x[keep[k] + j];
      y_out[k * kHop + j] += w[j] * y[keep[k] + j];
    }
}

// One-third octave band edges as DFT bin ranges [lo, hi).
std::vector<std::pair<int, int>> third_octave_bins() {
  const int n_bins = kFftSize / 2 + 1;
  auto nearest = [&](double f) {
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (int b = 0; b < n_bins; ++b) {
      const double d = std::abs(b * static_cast<double>(kStoiRate) / kFftSize - f);
      if (d < best_d) {
        best_d = d;
        best = b;
      }
    }
    return best;
  };
  std::vector<std::pair<int, int>> bands;
  for (int k = 0; k < kNumThirdOct; ++k) {
    const double lo = kMinFreq * std::pow(2.0, (2.0 * k - 1.0) / 6.0);
    const double hi = kMinFreq * std::pow(2.0, (2.0 * k + 1.0) / 6.0);
    bands.emplace_back(nearest(lo), nearest(hi));
  }
  return bands;
}

// Band envelopes, one row of frames per band.
std::vector<std::vector<double>> band_envelopes(const Signal& x) {
  static const RealDft dft(kFftSize);
  static const auto bands = third_octave_bins();
  const auto w = inner_hann(kFrameLen);
  std::vector<std::vector<double>> env(kNumThirdOct);
  std::vector<double> frame(kFrameLen);
  std::vector<Complex> spec(dft.num_bins());
  for (std::size_t i = 0; i + kFrameLen < x.size(); i += kHop) {
    for (int j = 0; j < kFrameLen; ++j) frame[j] = w[j] * x[i + j];
    dft.forward(frame, spec);
    for (int b = 0; b < kNumThirdOct; ++b) {
      double p = 0.0;
      for (int k = bands[b].first; k < bands[b].second; ++k) p += std::norm(spec[k]);
      env[b].push_back(std::sqrt(p));
    }
  }
  return env;
}

}  // namespace

double stoi(std::span<const double> clean, std::span<const double> degraded, int sample_rate) {
  if (clean.size() != degraded.size())
    throw DataError("intelligibility inputs differ in length");
  for (double v : degraded)
    if (!std::isfinite(v)) throw DataError("non-finite degraded sample");
  Signal x = resample(clean, kStoiRate, sample_rate);
  Signal y = resample(degraded, kStoiRate, sample_rate);
  if (rms(x) <= 0.0) throw DataError("reference signal is silent");

  Signal xs, ys;
  remove_silent_frames(x, y, xs, ys);
  const auto xe = band_envelopes(xs);
  const auto ye = band_envelopes(ys);
  const int frames = static_cast<int>(xe[0].size());
  if (frames < kSegment)
    throw DataError("only " + std::to_string(frames) +
                    " speech-active frames; intelligibility needs at least 30");

  const double clip = std::pow(10.0, -kBetaDb / 20.0);
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> xv(kSegment), yv(kSegment);
  for (int m = kSegment; m <= frames; ++m) {
    for (int b = 0; b < kNumThirdOct; ++b) {
      double nx = 0.0, ny = 0.0;
      for (int t = 0; t < kSegment; ++t) {
        xv[t] = xe[b][m - kSegment + t];
        yv[t] = ye[b][m - kSegment + t];
        nx += xv[t] * xv[t];
        ny += yv[t] * yv[t];
      }
      const double alpha = std::sqrt(nx) / (std::sqrt(ny) + kEps);
      double mx = 0.0, my = 0.0;
      for (int t = 0; t < kSegment; ++t) {
        yv[t] = std::min(yv[t] * alpha, xv[t] * (1.0 + clip));
        mx += xv[t];
        my += yv[t];
      }
      mx /= kSegment;
      my /= kSegment;
      double sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (int t = 0; t < kSegment; ++t) {
        const double a = xv[t] - mx, c = yv[t] - my;
        sxx += a * a;
        syy += c * c;
        sxy += a * c;
      }
      total += sxy / ((std::sqrt(sxx) + kEps) * (std::sqrt(syy) + kEps));
      ++count;
    }
  }
  return std::clamp(total / static_cast<double>(count), 0.0, 1.0);
}

double delta_stoi(std::span<const double> clean, std::span<const double> noisy,
                  std::span<const double> enhanced, int sample_rate) {
  return stoi(clean, enhanced, sample_rate) - stoi(clean, noisy, sample_rate);
}

void save_gain_trace(const GainTrace& trace, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  const std::uint32_t bands = trace.gains.empty() ? kNumBands : trace.gains.front().size();
  binio::write_magic(os, "HAGT");
  binio::write_u32(os, 1);
  binio::write_u32(os, bands);
  binio::write_u32(os, static_cast<std::uint32_t>(trace.size()));
  std::vector<float> buf(bands);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.gains[i].size() != bands) throw ConfigError("ragged gain trace");
    binio::write_u32(os, static_cast<std::uint32_t>(trace.frame_index[i]));
    std::transform(trace.gains[i].begin(), trace.gains[i].end(), buf.begin(),
                   [](double g) { return static_cast<float>(g); });
    binio::write_f32s(os, buf);
  }
}

GainTrace load_gain_trace(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  binio::expect_magic(is, "HAGT");
  if (binio::read_u32(is) != 1) throw DataError(path.string() + ": unsupported trace version");
  const std::uint32_t bands = binio::read_u32(is);
  const std::uint32_t count = binio::read_u32(is);
  GainTrace t;
  std::vector<float> buf(bands);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto k = binio::read_u32(is);
    binio::read_f32s(is, buf);
    t.push(k, GainVector(buf.begin(), buf.end()));
  }
  return t;
}

NrSd nr_sd(std::span<const SubbandFrame> s_frames, std::span<const SubbandFrame> n_frames,
           const GainTrace& trace, std::int64_t skip_frames) {
  if (s_frames.size() != n_frames.size())
    throw DataError("speech and noise frame counts differ");
  double n_in = 0.0, n_out = 0.0, s_in = 0.0, s_err = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::int64_t k = trace.frame_index[i];
    if (k < 0 || k >= static_cast<std::int64_t>(s_frames.size()))
      throw DataError("gain trace frame " + std::to_string(k) + " outside the signal");
    if (k < skip_frames) continue;
    const auto& g = trace.gains[i];
    const auto& sf = s_frames[k];
    const auto& nf = n_frames[k];
    if (static_cast<int>(g.size()) != sf.num_bands())
      throw DataError("gain trace band count differs from the filter bank");
    for (std::size_t f = 0; f < g.size(); ++f) {
      const double pn = std::norm(nf.bins[f]);
      const double ps = std::norm(sf.bins[f]);
      n_in += pn;
      n_out += g[f] * g[f] * pn;
      s_in += ps;
      s_err += (1.0 - g[f]) * (1.0 - g[f]) * ps;
    }
  }
  NrSd out;
  out.nr_db = (n_in > 0.0 && n_out > 0.0) ? 10.0 * std::log10(n_in / n_out) : 0.0;
  out.sd_db = (s_in > 0.0 && s_err > 0.0)
                  ? std::max(kSdFloorDb, 10.0 * std::log10(s_err / s_in))
                  : kSdFloorDb;
  return out;
}

NrSd nr_sd(std::span<const double> s, std::span<const double> n, const GainTrace& trace,
           const FilterbankConfig& fb, std::int64_t skip_frames) {
  if (s.size() != n.size()) throw DataError("speech and noise lengths differ");
  const auto sf = analyze(s, fb);
  const auto nf = analyze(n, fb);
  return nr_sd(sf, nf, trace, skip_frames);
}

void write_eval_csv(const std::vector<EvalRecord>& records, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << "mixture_id,snr_db,system,stoi,delta_stoi,nr_db,sd_db\n";
  os.precision(10);
  for (const auto& r : records)
    os << r.mixture_id << ',' << r.snr_db << ',' << r.system << ',' << r.stoi << ','
       << r.delta_stoi << ',' << r.nr_db << ',' << r.sd_db << '\n';
}

Quartiles quartiles(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  return {q(0.25), q(0.5), q(0.75)};
}

std::vector<SummaryRow> summarize(const std::vector<EvalRecord>& records) {
  std::vector<std::string> systems;
  std::map<std::pair<std::string, double>, std::vector<const EvalRecord*>> groups;
  for (const auto& r : records) {
    if (std::find(systems.begin(), systems.end(), r.system) == systems.end())
      systems.push_back(r.system);
    groups[{r.system, r.snr_db}].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& sys : systems) {
    for (const auto& [key, recs] : groups) {
      if (key.first != sys) continue;
      SummaryRow row;
      row.system = sys;
      row.snr_db = key.second;
      row.count = recs.size();
      std::vector<double> a, b, c, d;
      for (const auto* r : recs) {
        a.push_back(r->stoi);
        b.push_back(r->delta_stoi);
        c.push_back(r->nr_db);
        d.push_back(r->sd_db);
      }
      row.stoi = quartiles(a);
      row.delta_stoi = quartiles(b);
      row.nr_db = quartiles(c);
      row.sd_db = quartiles(d);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << "system,snr_db,count";
  for (const char* m : {"stoi", "delta_stoi", "nr_db", "sd_db"})
    os << ',' << m << "_q1," << m << "_median," << m << "_q3";
  os << '\n';
  os.precision(10);
  for (const auto& r : rows) {
    os << r.system << ',' << r.snr_db << ',' << r.count;
    for (const auto* q : {&r.stoi, &r.delta_stoi, &r.nr_db, &r.sd_db})
      os << ',' << q->q1 << ',' << q->median << ',' << q->q3;
    os << '\n';
  }
}

}  // namespace hanr
