#pragma once

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace stftpr::detail {

// Eigen's FFT caches twiddles per size inside the object, so one instance per
// thread keeps concurrent callers independent.
inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

/// Unnormalized forward DFT: out(k) = sum_n in(n) e^{-2 pi i k n / N}.
inline std::vector<std::complex<double>> forward_dft(
    const std::vector<std::complex<double>>& in) {
  // kissfft cannot plan a length-1 transform; it is the identity anyway.
  if (in.size() <= 1) return in;
  std::vector<std::complex<double>> out;
  fft_engine().fwd(out, in);
  return out;
}

/// Unnormalized inverse DFT: out(n) = sum_k in(k) e^{2 pi i k n / N}.
inline std::vector<std::complex<double>> backward_dft(
    const std::vector<std::complex<double>>& in) {
  if (in.size() <= 1) return in;
  std::vector<std::complex<double>> out;
  fft_engine().inv(out, in);
  const double n = static_cast<double>(in.size());
  for (auto& v : out) v *= n;
  return out;
}

}  // namespace stftpr::detail
