#pragma once

// Double-precision reference forward pass and a central finite-difference
// gradient check for the gain network.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hanr/network.hpp"

namespace oracle {

// Records the ReLU sign pattern when `pattern` is given.
inline Eigen::MatrixXd net_forward(const hanr::NetworkParams& p, const Eigen::MatrixXd& x,
                                   std::vector<bool>* pattern = nullptr) {
  Eigen::MatrixXd a = x;
  const double lo = p.topology.gain_floor();
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const Eigen::MatrixXd w = p.layers[l].weight.cast<double>();
    const Eigen::VectorXd b = p.layers[l].bias.cast<double>();
    Eigen::MatrixXd z = w * a;
    z.colwise() += b;
    if (l + 1 < p.layers.size()) {
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (pattern) pattern->push_back(z.data()[i] > 0.0);
        z.data()[i] = std::max(0.0, z.data()[i]);
      }
    } else {
      for (Eigen::Index i = 0; i < z.size(); ++i)
        z.data()[i] = lo + (1.0 - lo) / (1.0 + std::exp(-z.data()[i]));
    }
    a = z;
  }
  return a;
}

inline double net_mse(const hanr::NetworkParams& p, const Eigen::MatrixXd& x,
                      const Eigen::MatrixXd& t, std::vector<bool>* pattern = nullptr) {
  const Eigen::MatrixXd y = net_forward(p, x, pattern);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    acc += (y.data()[i] - t.data()[i]) * (y.data()[i] - t.data()[i]);
  return acc / static_cast<double>(y.size());
}

struct GradCheck {
  int checked = 0;
  int kinks = 0;  // perturbation straddled a ReLU kink; not differentiable there
  int failures = 0;
  double worst = 0.0;
};

// Compares every analytic gradient component with (f(p+h) - f(p-h)) / (2h),
// the perturbation applied to the 32-bit parameter and the loss evaluated
// in double precision.
inline GradCheck finite_difference_check(hanr::NetworkParams p, const Eigen::MatrixXf& x,
                                         const Eigen::MatrixXf& t, const hanr::Gradients& g,
                                         float h = 1e-3f, double tol = 1e-2) {
  const Eigen::MatrixXd xd = x.cast<double>(), td = t.cast<double>();
  GradCheck r;
  auto check = [&](float& param, float analytic) {
    const float orig = param;
    param = orig + h;
    const double up = param;
    std::vector<bool> pat_up, pat_dn;
    const double f_up = net_mse(p, xd, td, &pat_up);
    param = orig - h;
    const double dn = param;
    const double f_dn = net_mse(p, xd, td, &pat_dn);
    param = orig;
    if (pat_up != pat_dn) {
      ++r.kinks;
      return;
    }
    const double numeric = (f_up - f_dn) / (up - dn);
    const double denom = std::max(std::abs(numeric), std::abs(static_cast<double>(analytic)));
    const double rel = denom == 0.0 ? 0.0 : std::abs(numeric - analytic) / denom;
    r.worst = std::max(r.worst, rel);
    ++r.checked;
    if (!(rel < tol)) ++r.failures;
  };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& w = p.layers[l].weight;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) check(w(i, j), g.layers[l].weight(i, j));
    auto& b = p.layers[l].bias;
    for (Eigen::Index i = 0; i < b.size(); ++i) check(b(i), g.layers[l].bias(i));
  }
  return r;
}

}  // namespace oracle
