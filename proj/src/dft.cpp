#include "hanr/dft.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

#include "hanr/error.hpp"

namespace hanr {

RealDft::RealDft(int size) : size_(size), cos_(size), sin_(size) {
  if (size < 2 || size % 2 != 0) throw ConfigError("DFT size must be even and >= 2");
  for (int n = 0; n < size; ++n) {
    const double phi = 2.0 * std::numbers::pi * n / size;
    cos_[n] = std::cos(phi);
    sin_[n] = std::sin(phi);
  }
}

void RealDft::forward(std::span<const double> x, std::span<Complex> out) const {
  assert(static_cast<int>(x.size()) <= size_);
  assert(static_cast<int>(out.size()) >= num_bins());
  const int len = static_cast<int>(x.size());
  for (int k = 0; k < num_bins(); ++k) {
    double re = 0.0, im = 0.0;
    int idx = 0;
    for (int n = 0; n < len; ++n) {
      re += x[n] * cos_[idx];
      im -= x[n] * sin_[idx];
      idx += k;
      if (idx >= size_) idx -= size_;
    }
    out[k] = {re, im};
  }
}

void RealDft::inverse(std::span<const Complex> bins, std::span<double> out) const {
  assert(static_cast<int>(bins.size()) >= num_bins());
  assert(static_cast<int>(out.size()) >= size_);
  const int half = size_ / 2;
  const double scale = 1.0 / size_;
  for (int n = 0; n < size_; ++n) {
    double acc = bins[0].real() + ((n & 1) ? -bins[half].real() : bins[half].real());
    int idx = n;
    for (int k = 1; k < half; ++k) {
      acc += 2.0 * (bins[k].real() * cos_[idx] - bins[k].imag() * sin_[idx]);
      idx += n;
      if (idx >= size_) idx -= size_;
    }
    out[n] = acc * scale;
  }
}

}  // namespace hanr
