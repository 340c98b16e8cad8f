#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>

namespace hanr {

struct AdamHyper {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update in place. step is 1-based (the value after
// incrementing the step counter for this update).
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m,
                 std::span<T> v, std::int64_t step, const AdamHyper& h) {
  assert(param.size() == grad.size() && m.size() == grad.size() && v.size() == grad.size());
  assert(step >= 1);
  const T b1 = static_cast<T>(h.beta1);
  const T b2 = static_cast<T>(h.beta2);
  const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(h.beta1, static_cast<double>(step))));
  const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(h.beta2, static_cast<double>(step))));
  const T lr = static_cast<T>(h.learning_rate);
  const T eps = static_cast<T>(h.eps);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    m[i] = b1 * m[i] + (T(1) - b1) * g;
    v[i] = b2 * v[i] + (T(1) - b2) * g * g;
    param[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

}  // namespace hanr
