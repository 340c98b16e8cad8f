#include "hanr/wiener.hpp"

#include <algorithm>
#include <cmath>

#include "hanr/error.hpp"
#include "hanr/features.hpp"

namespace hanr {

double gain_floor(double max_atten_db) {
  if (!(max_atten_db >= 0.0)) throw ConfigError("maximum attenuation must be >= 0 dB");
  return std::pow(10.0, -max_atten_db / 20.0);
}

GainVector ideal_gain(const SubbandFrame& speech, const SubbandFrame& noise) {
  if (speech.bins.size() != noise.bins.size())
    throw ConfigError("speech and noise frames differ in band count");
  const int bands = speech.num_bands();
  GainVector g(bands);
  for (int f = 0; f < bands; ++f) {
    const double ps = std::norm(speech.bins[f]);
    const double pn = std::norm(noise.bins[f]);
    g[f] = (ps < kPowerFloor && pn < kPowerFloor) ? 1.0 : ps / (ps + pn);
  }
  return g;
}

GainVector clamp_gain(std::span<const double> g, double max_atten_db) {
  const double lo = gain_floor(max_atten_db);
  GainVector out(g.size());
  for (std::size_t f = 0; f < g.size(); ++f) out[f] = std::min(1.0, std::max(g[f], lo));
  return out;
}

SubbandFrame apply_gain(const SubbandFrame& x, std::span<const double> g) {
  if (g.size() != static_cast<std::size_t>(x.num_bands()))
    throw ConfigError("gain vector length differs from band count");
  SubbandFrame out = x;
  for (std::size_t f = 0; f < g.size(); ++f) out.bins[f] *= g[f];
  return out;
}

}  // namespace hanr
