#pragma once

#include <span>

#include "hanr/wav.hpp"

namespace hanr {

// Rational-rate polyphase resampler with a Kaiser-windowed sinc low-pass
// (half-length 10 taps per unit of max(up, down), beta 5), zero-phase
// aligned so output sample m corresponds to input time m * down / up.
Signal resample(std::span<const double> x, int up, int down);

}  // namespace hanr
