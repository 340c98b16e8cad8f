#pragma once

#include <span>
#include <vector>

#include "hanr/filterbank.hpp"

namespace hanr {

inline constexpr double kDefaultMaxAttenDb = 14.0;

using GainVector = std::vector<double>;

// 10^(-max_atten_db / 20); throws ConfigError for negative attenuation.
double gain_floor(double max_atten_db = kDefaultMaxAttenDb);

// |S|^2 / (|S|^2 + |N|^2) per modelled band; 1 where both powers are below
// the power floor (no evidence of noise).
GainVector ideal_gain(const SubbandFrame& speech, const SubbandFrame& noise);

GainVector clamp_gain(std::span<const double> g, double max_atten_db = kDefaultMaxAttenDb);

// Scales the first g.size() bins by the real gains. Remaining bins (the
// Nyquist bin) pass through unchanged.
SubbandFrame apply_gain(const SubbandFrame& x, std::span<const double> g);

}  // namespace hanr
