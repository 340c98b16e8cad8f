#include "hanr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "hanr/error.hpp"

namespace hanr {
namespace {

std::uint64_t draw_index(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

double level_gain(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw DataError("unknown split '" + s + "'");
}

void MixManifest::validate() const {
  if (noises.empty() || noises.size() > kMaxNoises)
    throw DataError(mixture_id + ": needs 1 to 4 noise segments");
  if (!(g_s > 0.0)) throw DataError(mixture_id + ": g_s must be positive");
  if (num_samples <= 0) throw DataError(mixture_id + ": empty mixture");
  for (const auto& n : noises)
    if (n.offset_samples < 0) throw DataError(mixture_id + ": negative noise offset");
}

nlohmann::ordered_json to_json(const MixManifest& m) {
  nlohmann::ordered_json j;
  j["mixture_id"] = m.mixture_id;
  j["speech_id"] = m.speech_id;
  j["noise_ids"] = nlohmann::ordered_json::array();
  j["offset_samples"] = nlohmann::ordered_json::array();
  for (const auto& n : m.noises) {
    j["noise_ids"].push_back(n.id);
    j["offset_samples"].push_back(n.offset_samples);
  }
  j["num_samples"] = m.num_samples;
  j["target_snr_db"] = m.target_snr_db;
  j["g_s"] = m.g_s;
  j["g_l_db"] = m.g_l_db;
  j["split"] = to_string(m.split);
  j["rng_seed"] = m.rng_seed;
  j["peak_normalized"] = m.peak_normalized;
  j["peak_scale"] = m.peak_scale;
  return j;
}

MixManifest manifest_from_json(const nlohmann::json& j) {
  try {
    MixManifest m;
    m.mixture_id = j.at("mixture_id").get<std::string>();
    m.speech_id = j.at("speech_id").get<std::string>();
    const auto& ids = j.at("noise_ids");
    const auto& offs = j.at("offset_samples");
    if (ids.size() != offs.size()) throw DataError("noise_ids/offset_samples length mismatch");
    for (std::size_t i = 0; i < ids.size(); ++i)
      m.noises.push_back({ids[i].get<std::string>(), offs[i].get<std::int64_t>()});
    m.num_samples = j.at("num_samples").get<std::int64_t>();
    m.target_snr_db = j.at("target_snr_db").get<double>();
    m.g_s = j.at("g_s").get<double>();
    m.g_l_db = j.at("g_l_db").get<double>();
    m.split = split_from_string(j.at("split").get<std::string>());
    m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    m.peak_normalized = j.value("peak_normalized", false);
    m.peak_scale = j.value("peak_scale", 1.0);
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifests(const std::vector<MixManifest>& ms, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  for (const auto& m : ms) os << to_json(m).dump() << '\n';
}

std::vector<MixManifest> read_manifests(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  std::vector<MixManifest> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ": " + e.what());
    }
    out.push_back(manifest_from_json(j));
  }
  return out;
}

Signal build_noise_mixture(std::span<const Signal> noises,
                           std::span<const std::int64_t> offsets, std::size_t length) {
  if (noises.empty() || noises.size() > kMaxNoises)
    throw DataError("a noise mixture combines 1 to 4 noises");
  if (offsets.size() != noises.size()) throw DataError("one offset per noise required");
  Signal n0(length, 0.0);
  for (std::size_t i = 0; i < noises.size(); ++i) {
    const auto off = offsets[i];
    if (off < 0 || static_cast<std::size_t>(off) + length > noises[i].size())
      throw DataError("noise offset " + std::to_string(off) + " runs past the end of the file");
    for (std::size_t t = 0; t < length; ++t) n0[t] += noises[i][off + t];
  }
  return n0;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double compute_gs(std::span<const double> s0, std::span<const double> n0, double target_snr_db) {
  const double rs = rms(s0), rn = rms(n0);
  if (rs <= 0.0) throw DataError("speech segment has zero energy");
  if (rn <= 0.0) throw DataError("noise segment has zero energy");
  return std::pow(10.0, target_snr_db / 20.0) * rn / rs;
}

double snr_db(std::span<const double> s, std::span<const double> n) {
  return 20.0 * std::log10(rms(s) / rms(n));
}

MixedSignals mix(std::span<const double> s0, std::span<const double> n0, double g_s,
                 double g_l_db) {
  if (s0.size() != n0.size()) throw DataError("speech and noise lengths differ");
  const double gl = level_gain(g_l_db);
  MixedSignals out;
  double peak = 0.0;
  for (std::size_t t = 0; t < s0.size(); ++t)
    peak = std::max(peak, std::abs(gl * (n0[t] + g_s * s0[t])));
  if (peak >= 1.0) {
    out.peak_normalized = true;
    out.peak_scale = 0.99 / peak;
  }
  const double scale = gl * out.peak_scale;
  out.x.resize(s0.size());
  out.s.resize(s0.size());
  out.n.resize(s0.size());
  for (std::size_t t = 0; t < s0.size(); ++t) {
    out.s[t] = scale * g_s * s0[t];
    out.n[t] = scale * n0[t];
    out.x[t] = out.s[t] + out.n[t];
  }
  return out;
}

MixedSignals mix(std::span<const double> s0, std::span<const double> n0, const MixManifest& m) {
  return mix(s0, n0, m.g_s, m.g_l_db);
}

std::vector<std::string> SplitAssignment::speech_in(Split s) const {
  std::vector<std::string> out;
  for (const auto& [id, sp] : speech)
    if (sp == s) out.push_back(id);
  return out;
}

std::vector<std::string> SplitAssignment::noise_in(Split s) const {
  std::vector<std::string> out;
  for (const auto& [id, sp] : noise)
    if (sp == s) out.push_back(id);
  return out;
}

namespace {

std::map<std::string, Split> assign(std::vector<std::string> ids, const SplitRatios& r,
                                    std::mt19937_64& rng, const char* what) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[draw_index(rng, i)]);

  const double ratios[3] = {r.train, r.val, r.test};
  const std::size_t n = ids.size();
  std::size_t counts[3];
  std::size_t used = 0;
  for (int k = 0; k < 3; ++k) {
    counts[k] = static_cast<std::size_t>(std::floor(ratios[k] * n));
    if (ratios[k] > 0.0 && counts[k] == 0) counts[k] = 1;
    used += counts[k];
  }
  // Leftover files go to the training split; overshoot comes out of train.
  if (used < n) counts[0] += n - used;
  if (used > n) {
    const std::size_t excess = used - n;
    if (counts[0] <= excess || (ratios[0] > 0.0 && counts[0] - excess < 1))
      throw DataError(std::string("not enough ") + what + " files (" + std::to_string(n) +
                      ") for a leakage-free split");
    counts[0] -= excess;
  }
  std::map<std::string, Split> out;
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k)
    for (std::size_t c = 0; c < counts[k]; ++c) out[ids[pos++]] = static_cast<Split>(k);
  return out;
}

}  // namespace

SplitAssignment split_corpus(const std::vector<std::string>& speech_ids,
                             const std::vector<std::string>& noise_ids,
                             const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
    throw ConfigError("split ratios must be non-negative and sum to 1");
  std::mt19937_64 rng(seed);
  SplitAssignment a;
  a.speech = assign(speech_ids, ratios, rng, "speech");
  a.noise = assign(noise_ids, ratios, rng, "noise");
  return a;
}

std::vector<std::string> Corpus::speech_ids() const {
  std::vector<std::string> ids;
  for (const auto& [k, v] : speech) ids.push_back(k);
  return ids;
}

std::vector<std::string> Corpus::noise_ids() const {
  std::vector<std::string> ids;
  for (const auto& [k, v] : noise) ids.push_back(k);
  return ids;
}

Corpus load_corpus(const std::filesystem::path& dir, int sample_rate) {
  Corpus c;
  auto load = [&](const char* sub, std::map<std::string, Signal>& into) {
    const auto d = dir / sub;
    if (!std::filesystem::is_directory(d))
      throw DataError("corpus directory lacks '" + std::string(sub) + "/': " + dir.string());
    for (const auto& e : std::filesystem::directory_iterator(d))
      if (e.path().extension() == ".wav")
        into[e.path().stem().string()] = read_wav_checked(e.path(), sample_rate);
    if (into.empty()) throw DataError("no .wav files in " + d.string());
  };
  load("speech", c.speech);
  load("noise", c.noise);
  return c;
}

std::vector<MixManifest> generate_manifests(const Corpus& corpus, const SplitAssignment& split,
                                            const MixConfig& cfg) {
  if (cfg.snr_set_db.empty() || cfg.level_set_db.empty())
    throw ConfigError("SNR and level sets must not be empty");
  std::mt19937_64 rng(cfg.seed);
  std::vector<MixManifest> out;
  const std::pair<Split, int> plan[] = {{Split::kTrain, cfg.mixtures_train},
                                        {Split::kVal, cfg.mixtures_val},
                                        {Split::kTest, cfg.mixtures_test}};
  for (const auto& [sp, count] : plan) {
    if (count <= 0) continue;
    const auto speech = split.speech_in(sp);
    const auto noise = split.noise_in(sp);
    if (speech.empty() || noise.empty())
      throw DataError("split '" + to_string(sp) + "' has no speech or no noise files");
    for (int i = 0; i < count; ++i) {
      MixManifest m;
      m.split = sp;
      m.rng_seed = rng();
      std::mt19937_64 local(m.rng_seed);
      m.mixture_id = to_string(sp) + "_" + std::to_string(i);
      m.speech_id = speech[draw_index(local, speech.size())];
      const Signal& s0 = corpus.speech.at(m.speech_id);
      m.num_samples = static_cast<std::int64_t>(s0.size());
      const int k = 1 + static_cast<int>(draw_index(local, kMaxNoises));
      for (int j = 0; j < k; ++j) {
        NoiseSegment seg;
        seg.id = noise[draw_index(local, noise.size())];
        const auto len = static_cast<std::int64_t>(corpus.noise.at(seg.id).size());
        if (len < m.num_samples)
          throw DataError("noise '" + seg.id + "' is shorter than speech '" + m.speech_id + "'");
        seg.offset_samples =
            static_cast<std::int64_t>(draw_index(local, static_cast<std::uint64_t>(len - m.num_samples + 1)));
        m.noises.push_back(seg);
      }
      m.target_snr_db = cfg.snr_set_db[draw_index(local, cfg.snr_set_db.size())];
      m.g_l_db = cfg.level_set_db[draw_index(local, cfg.level_set_db.size())];

      std::vector<Signal> segs;
      std::vector<std::int64_t> offs;
      for (const auto& seg : m.noises) {
        segs.push_back(corpus.noise.at(seg.id));
        offs.push_back(seg.offset_samples);
      }
      const Signal n0 = build_noise_mixture(segs, offs, s0.size());
      m.g_s = compute_gs(s0, n0, m.target_snr_db);
      const MixedSignals mixed = mix(s0, n0, m.g_s, m.g_l_db);
      if (mixed.peak_normalized)
        std::cerr << "warning: " << m.mixture_id << " would clip; peak-normalized by "
                  << mixed.peak_scale << '\n';
      m.peak_normalized = mixed.peak_normalized;
      m.peak_scale = mixed.peak_scale;
      out.push_back(std::move(m));
    }
  }
  return out;
}

MixedSignals realize(const MixManifest& m, const Corpus& corpus) {
  m.validate();
  const auto sit = corpus.speech.find(m.speech_id);
  if (sit == corpus.speech.end()) throw DataError("unknown speech id '" + m.speech_id + "'");
  if (static_cast<std::int64_t>(sit->second.size()) != m.num_samples)
    throw DataError(m.mixture_id + ": speech length differs from manifest");
  std::vector<Signal> segs;
  std::vector<std::int64_t> offs;
  for (const auto& seg : m.noises) {
    const auto nit = corpus.noise.find(seg.id);
    if (nit == corpus.noise.end()) throw DataError("unknown noise id '" + seg.id + "'");
    segs.push_back(nit->second);
    offs.push_back(seg.offset_samples);
  }
  const Signal n0 = build_noise_mixture(segs, offs, sit->second.size());
  return mix(sit->second, n0, m);
}

}  // namespace hanr
