#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "stftpr/errors.hpp"

namespace stftpr {

using Complex = std::complex<double>;

/// Length-N complex signal x(0..N-1).
using Signal = std::vector<Complex>;

/// Sorted indices of the entries of a signal that count as nonzero.
using SupportSet = std::vector<int>;

inline constexpr double kDefaultZeroTol = 1e-12;

/// Problem dimensions shared by every stage of the pipeline.
struct ProblemConfig {
  int N = 0;     // signal length
  int L = 1;     // hop between adjacent short-time sections
  int R = 1;     // number of windows
  double zero_tol = kDefaultZeroTol;

  /// Number of hop positions, N / L.
  int hops() const { return N / L; }

  void validate() const {
    if (N <= 0) throw ConfigError("N must be positive");
    if (L <= 0) throw ConfigError("L must be positive");
    if (R <= 0) throw ConfigError("R must be positive");
    if (N % L != 0) {
      throw ConfigError("L = " + std::to_string(L) + " does not divide N = " +
                        std::to_string(N));
    }
    if (!(zero_tol >= 0.0)) throw ConfigError("zero_tol must be nonnegative");
  }
};

/// Canonical representative of `a mod n` in [0, n).
inline int wrap_index(long long a, int n) {
  long long r = a % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

inline double max_abs(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

/// Entrywise nonzero mask under the relative threshold
/// |v(n)| > zero_tol * max |v|.
inline std::vector<bool> nonzero_mask(const std::vector<Complex>& v,
                                      double zero_tol) {
  const double peak = max_abs(v);
  const double cutoff = zero_tol * peak;
  std::vector<bool> mask(v.size(), false);
  if (peak == 0.0) return mask;
  for (std::size_t n = 0; n < v.size(); ++n) mask[n] = std::abs(v[n]) > cutoff;
  return mask;
}

inline SupportSet support(const Signal& x, const ProblemConfig& cfg) {
  if (static_cast<int>(x.size()) != cfg.N) {
    throw DimensionError("signal length " + std::to_string(x.size()) +
                         " does not match N = " + std::to_string(cfg.N));
  }
  const auto mask = nonzero_mask(x, cfg.zero_tol);
  SupportSet out;
  for (int n = 0; n < cfg.N; ++n) {
    if (mask[n]) out.push_back(n);
  }
  return out;
}

struct GlobalPhaseDistance {
  double distance = 0.0;
  double aligning_phase = 0.0;  // in [0, 2*pi)
};

/// min over theta of ||x - e^{i theta} y||_2, attained at
/// theta = arg sum_n conj(y(n)) x(n) (theta = 0 when that sum vanishes).
inline GlobalPhaseDistance phase_distance(const Signal& x, const Signal& y) {
  if (x.size() != y.size()) {
    throw DimensionError("phase_distance: lengths " + std::to_string(x.size()) +
                         " and " + std::to_string(y.size()) + " differ");
  }
  Complex inner{0.0, 0.0};
  for (std::size_t n = 0; n < x.size(); ++n) {
    inner += std::conj(y[n]) * x[n];
  }
  double theta = 0.0;
  if (inner != Complex{0.0, 0.0}) {
    theta = std::arg(inner);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    if (theta >= 2.0 * std::numbers::pi) theta = 0.0;
  }
  const Complex rot = std::polar(1.0, theta);
  double sq = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) sq += std::norm(x[n] - rot * y[n]);
  return {std::sqrt(sq), theta};
}

inline double l2_norm(const Signal& x) {
  double s = 0.0;
  for (const auto& z : x) s += std::norm(z);
  return std::sqrt(s);
}

}  // namespace stftpr
