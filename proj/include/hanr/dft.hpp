#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hanr {

using Complex = std::complex<double>;

// Table-driven real DFT for the short transform sizes used here (96 for the
// filter bank, 512 for the intelligibility metric). Direct evaluation keeps
// the arithmetic easy to audit; at these sizes it is cheap enough.
class RealDft {
 public:
  explicit RealDft(int size);

  int size() const { return size_; }
  int num_bins() const { return size_ / 2 + 1; }

  // X[k] = sum_n x[n] exp(-2 pi i k n / N), k in [0, N/2]. x may be shorter
  // than N (implicitly zero padded).
  void forward(std::span<const double> x, std::span<Complex> out) const;

  // Real part of (1/N) sum_k X[k] exp(+2 pi i k n / N) using Hermitian
  // symmetry of the full spectrum.
  void inverse(std::span<const Complex> bins, std::span<double> out) const;

 private:
  int size_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

}  // namespace hanr
