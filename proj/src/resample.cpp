#include "hanr/resample.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "hanr/error.hpp"

namespace hanr {

Signal resample(std::span<const double> x, int up, int down) {
  if (up <= 0 || down <= 0) throw ConfigError("resampling factors must be positive");
  const int g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == 1 && down == 1) return Signal(x.begin(), x.end());

  constexpr int kHalfTaps = 10;
  constexpr double kBeta = 5.0;
  const int m = std::max(up, down);
  const int half = kHalfTaps * m;
  const double fc = 0.5 / m;  // cycles per sample at the upsampled rate
  const double i0_beta = std::cyl_bessel_i(0.0, kBeta);
  std::vector<double> h(2 * half + 1);
  for (int k = -half; k <= half; ++k) {
    const double t = static_cast<double>(k);
    const double sinc = k == 0 ? 1.0 : std::sin(2.0 * std::numbers::pi * fc * t) /
                                           (2.0 * std::numbers::pi * fc * t);
    const double r = t / half;
    const double win = std::cyl_bessel_i(0.0, kBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[k + half] = up * 2.0 * fc * sinc * win;
  }

  const auto n_in = static_cast<long long>(x.size());
  const long long n_out = (n_in * up + down - 1) / down;
  Signal y(static_cast<std::size_t>(n_out), 0.0);
  for (long long j = 0; j < n_out; ++j) {
    const long long pos = j * down;  // position on the upsampled grid
    // Input samples i with |pos - i*up| <= half.
    long long i_lo = (pos - half + up - 1) / up;
    if (pos - half < 0) i_lo = 0;
    const long long i_hi = std::min(n_in - 1, (pos + half) / up);
    double acc = 0.0;
    for (long long i = std::max(0LL, i_lo); i <= i_hi; ++i) acc += x[i] * h[pos - i * up + half];
    y[j] = acc;
  }
  return y;
}

}  // namespace hanr
