#include "hanr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "hanr/filterbank.hpp"

namespace hanr {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFs = kSampleRate;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// RBJ band-pass biquad (constant peak gain).
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double z1 = 0, z2 = 0;

  static Biquad bandpass(double fc, double q) {
    const double w = 2.0 * kPi * fc / kFs;
    const double alpha = std::sin(w) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad bq;
    bq.b0 = alpha / a0;
    bq.b1 = 0.0;
    bq.b2 = -alpha / a0;
    bq.a1 = -2.0 * std::cos(w) / a0;
    bq.a2 = (1.0 - alpha) / a0;
    return bq;
  }
  static Biquad highpass(double fc, double q) {
    const double w = 2.0 * kPi * fc / kFs;
    const double alpha = std::sin(w) / (2.0 * q);
    const double c = std::cos(w);
    const double a0 = 1.0 + alpha;
    Biquad bq;
    bq.b0 = (1.0 + c) / 2.0 / a0;
    bq.b1 = -(1.0 + c) / a0;
    bq.b2 = bq.b0;
    bq.a1 = -2.0 * c / a0;
    bq.a2 = (1.0 - alpha) / a0;
    return bq;
  }
  static Biquad lowpass(double fc, double q) {
    const double w = 2.0 * kPi * fc / kFs;
    const double alpha = std::sin(w) / (2.0 * q);
    const double c = std::cos(w);
    const double a0 = 1.0 + alpha;
    Biquad bq;
    bq.b0 = (1.0 - c) / 2.0 / a0;
    bq.b1 = (1.0 - c) / a0;
    bq.b2 = bq.b0;
    bq.a1 = -2.0 * c / a0;
    bq.a2 = (1.0 - alpha) / a0;
    return bq;
  }
  double operator()(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

// Quiet source levels leave headroom for +20 dB SNR mixtures with four
// noises and +6 dB level jitter.
constexpr double kNoiseRms = 0.005;

void normalize_rms(Signal& x, double target) {
  const double r = rms(x);
  if (r > 0.0)
    for (double& v : x) v *= target / r;
}

double raised_cosine_env(double t, double dur, double ramp) {
  if (t < 0.0 || t > dur) return 0.0;
  const double r = std::min(ramp, dur / 2.0);
  if (t < r) return 0.5 - 0.5 * std::cos(kPi * t / r);
  if (t > dur - r) return 0.5 - 0.5 * std::cos(kPi * (dur - t) / r);
  return 1.0;
}

// Formant envelope magnitude at frequency f.
double formant_gain(double f, const double (&fc)[3], const double (&bw)[3]) {
  double g = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = (f - fc[i]) / bw[i];
    g += std::pow(0.55, i) / (1.0 + d * d);
  }
  return g;
}

}  // namespace

Signal white_noise(std::size_t n, std::uint64_t seed, double stddev) {
  Rng rng(seed);
  Signal x(n);
  for (double& v : x) v = stddev * rng.gauss();
  return x;
}

Signal synth_speech(double seconds, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(seconds * kFs);
  Signal out(n, 0.0);
  const double f0_base = rng.uniform(95.0, 230.0);

  double t0 = rng.uniform(0.05, 0.3);
  while (t0 < seconds) {
    const double dur = rng.uniform(0.12, 0.32);
    const double fc[3] = {rng.uniform(300.0, 850.0), rng.uniform(900.0, 2300.0),
                          rng.uniform(2400.0, 3400.0)};
    const double bw[3] = {80.0, 120.0, 180.0};
    const double amp = rng.uniform(0.4, 1.0);
    const double f0_start = f0_base * rng.uniform(0.85, 1.2);
    const double f0_end = f0_start * rng.uniform(0.8, 1.1);

    // Optional fricative onset: high-passed noise burst.
    double voiced_start = t0;
    if (rng.uniform() < 0.35) {
      const double fdur = rng.uniform(0.04, 0.1);
      Biquad hp = Biquad::highpass(rng.uniform(2500.0, 4500.0), 0.7);
      const double famp = 0.35 * amp;
      const auto i0 = static_cast<std::size_t>(t0 * kFs);
      for (std::size_t i = i0; i < n && i < i0 + static_cast<std::size_t>(fdur * kFs); ++i) {
        const double t = (i - i0) / kFs;
        out[i] += famp * raised_cosine_env(t, fdur, 0.01) * hp(rng.gauss());
      }
      voiced_start = t0 + fdur;
    }

    const int max_h = static_cast<int>(5000.0 / f0_base);
    std::vector<double> hgain(max_h + 1, 0.0);
    std::vector<double> hphase(max_h + 1, 0.0);
    for (int h = 1; h <= max_h; ++h) hphase[h] = rng.uniform(0.0, 2.0 * kPi);
    const auto i0 = static_cast<std::size_t>(voiced_start * kFs);
    const auto len = static_cast<std::size_t>(dur * kFs);
    double phase = 0.0;
    for (std::size_t i = i0; i < n && i < i0 + len; ++i) {
      const double t = (i - i0) / kFs;
      const double f0 = f0_start + (f0_end - f0_start) * t / dur;
      phase += 2.0 * kPi * f0 / kFs;
      const double env = amp * raised_cosine_env(t, dur, 0.03);
      double s = 0.0;
      for (int h = 1; h * f0 < 5500.0 && h <= max_h; ++h)
        s += formant_gain(h * f0, fc, bw) * std::sin(h * phase + hphase[h]) / std::sqrt(h);
      out[i] += env * s;
    }
    t0 = voiced_start + dur + rng.uniform(0.03, 0.15);
    if (rng.uniform() < 0.2) t0 += rng.uniform(0.25, 0.6);  // pause between phrases
  }
  normalize_rms(out, 0.05);
  return out;
}

Signal synth_noise(int kind, double seconds, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(seconds * kFs);
  Signal out(n, 0.0);
  switch (kind % 6) {
    case 0: {  // pink noise (Kellet filter)
      double b[7] = {};
      for (auto& v : out) {
        const double w = rng.gauss();
        b[0] = 0.99886 * b[0] + w * 0.0555179;
        b[1] = 0.99332 * b[1] + w * 0.0750759;
        b[2] = 0.96900 * b[2] + w * 0.1538520;
        b[3] = 0.86650 * b[3] + w * 0.3104856;
        b[4] = 0.55000 * b[4] + w * 0.5329522;
        b[5] = -0.7616 * b[5] - w * 0.0168980;
        v = b[0] + b[1] + b[2] + b[3] + b[4] + b[5] + b[6] + w * 0.5362;
        b[6] = w * 0.115926;
      }
      break;
    }
    case 1: {  // low-frequency rumble with slow level drift (traffic-like)
      Biquad lp = Biquad::lowpass(rng.uniform(300.0, 900.0), 0.7);
      const double rate = rng.uniform(0.1, 0.4);
      const double ph = rng.uniform(0.0, 2.0 * kPi);
      for (std::size_t i = 0; i < n; ++i) {
        const double lvl = 1.0 + 0.5 * std::sin(2.0 * kPi * rate * i / kFs + ph);
        out[i] = lvl * lp(rng.gauss()) + 0.05 * rng.gauss();
      }
      break;
    }
    case 2: {  // babble-like: band-limited noise with syllable-rate modulation
      Biquad bp = Biquad::bandpass(rng.uniform(500.0, 1500.0), 0.6);
      Biquad env_lp = Biquad::lowpass(rng.uniform(3.0, 6.0), 0.7);
      for (std::size_t i = 0; i < n; ++i) {
        const double env = std::max(0.0, 1.0 + 8.0 * env_lp(rng.gauss()));
        out[i] = env * bp(rng.gauss());
      }
      break;
    }
    case 3: {  // mains hum harmonics over white noise
      const double f = rng.uniform() < 0.5 ? 50.0 : 60.0;
      double phases[12];
      for (double& p : phases) p = rng.uniform(0.0, 2.0 * kPi);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int h = 1; h <= 12; ++h) s += std::sin(2.0 * kPi * f * h * i / kFs + phases[h - 1]) / h;
        out[i] = s + 0.3 * rng.gauss();
      }
      break;
    }
    case 4: {  // impulsive clatter: decaying high-passed bursts on a noise bed
      Biquad hp = Biquad::highpass(rng.uniform(1000.0, 3000.0), 0.7);
      double env = 0.0;
      const double decay = std::exp(-1.0 / (rng.uniform(0.01, 0.04) * kFs));
      const double rate = rng.uniform(2.0, 6.0) / kFs;
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < rate) env += rng.uniform(2.0, 6.0);
        env *= decay;
        out[i] = (0.2 + env) * hp(rng.gauss());
      }
      break;
    }
    default: {  // white noise with a spectral tilt (fan / HVAC)
      Biquad bp = Biquad::bandpass(rng.uniform(2000.0, 6000.0), 0.5);
      for (auto& v : out) {
        const double w = rng.gauss();
        v = 0.4 * w + bp(w);
      }
      break;
    }
  }
  normalize_rms(out, kNoiseRms);
  return out;
}

namespace {

// Stored corpora are float wav files; round once so in-memory and reloaded
// corpora agree.
Signal as_float(Signal x) {
  for (double& v : x) v = static_cast<float>(v);
  return x;
}

}  // namespace

Corpus make_synthetic_corpus(const SynthCorpusConfig& cfg) {
  Corpus c;
  std::mt19937_64 seeds(cfg.seed);
  for (int i = 0; i < cfg.num_speech; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "speech_%03d", i);
    c.speech[id] = as_float(synth_speech(cfg.speech_seconds, seeds()));
  }
  for (int i = 0; i < cfg.num_noise; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "noise_%03d", i);
    c.noise[id] = as_float(synth_noise(i, cfg.noise_seconds, seeds()));
  }
  return c;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "speech");
  std::filesystem::create_directories(dir / "noise");
  for (const auto& [id, sig] : corpus.speech) write_wav(dir / "speech" / (id + ".wav"), sig, kSampleRate);
  for (const auto& [id, sig] : corpus.noise) write_wav(dir / "noise" / (id + ".wav"), sig, kSampleRate);
}

}  // namespace hanr
