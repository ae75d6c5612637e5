#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stftpr/detail/fft.hpp"
#include "stftpr/model.hpp"
#include "stftpr/window.hpp"

namespace stftpr {

/// X_w(Lm, k) for m in [0, N/L), k in [0, N), row-major in (m, k).
struct StftCoefficients {
  int hops = 0;
  int N = 0;
  std::vector<Complex> values;

  Complex operator()(int m, int k) const {
    return values[static_cast<std::size_t>(m) * N + k];
  }
  Complex& operator()(int m, int k) {
    return values[static_cast<std::size_t>(m) * N + k];
  }
};

/// Squared STFT magnitudes (possibly noisy), indexed by (r, m, k).
struct MeasurementGrid {
  int R = 0;
  int hops = 0;
  int N = 0;
  std::vector<double> values;
  double noise_level = 0.0;

  MeasurementGrid() = default;
  MeasurementGrid(int R_, int hops_, int N_)
      : R(R_), hops(hops_), N(N_),
        values(static_cast<std::size_t>(R_) * hops_ * N_, 0.0) {}

  std::size_t index(int r, int m, int k) const {
    return (static_cast<std::size_t>(r) * hops + m) * N + k;
  }
  double operator()(int r, int m, int k) const { return values[index(r, m, k)]; }
  double& operator()(int r, int m, int k) { return values[index(r, m, k)]; }

  int hop() const { return hops > 0 ? N / hops : 0; }
};

/// The two per-(r, m) sums the reconstruction needs:
///   Z(r, m) = sum_k grid(r, m, k)
///   C(r, m) = sum_k grid(r, m, k) e^{i 2 pi k (l(w_r) - 1) / N}
struct AggregateMeasurements {
  int R = 0;
  int hops = 0;
  int N = 0;
  std::vector<double> Z;
  std::vector<Complex> C;
  double noise_level = 0.0;

  std::size_t index(int r, int m) const {
    return static_cast<std::size_t>(r) * hops + m;
  }
  double z(int r, int m) const { return Z[index(r, m)]; }
  Complex c(int r, int m) const { return C[index(r, m)]; }

  /// Number of scalar sums held: N R / L energies Z and N R / L
  /// correlations C.
  std::size_t measurement_count() const { return Z.size() + C.size(); }
};

inline void check_hop(int N, int L) {
  if (L <= 0 || N <= 0 || N % L != 0) {
    throw ConfigError("L = " + std::to_string(L) + " does not divide N = " +
                      std::to_string(N));
  }
}

/// X_w(Lm, k) = (1/N) sum_n x(n) w(Lm - n mod N) e^{-i 2 pi k n / N},
/// one length-N FFT per hop.
inline StftCoefficients stft_forward(const Signal& x, const Window& w, int L) {
  const int N = static_cast<int>(x.size());
  if (static_cast<int>(w.size()) != N) {
    throw DimensionError("window length " + std::to_string(w.size()) +
                         " does not match signal length " + std::to_string(N));
  }
  check_hop(N, L);
  if (max_abs(w) == 0.0) throw InvalidWindowError("window is identically zero");

  StftCoefficients out{N / L, N, std::vector<Complex>(static_cast<std::size_t>(N) * N / L)};
  std::vector<Complex> section(N);
  const double scale = 1.0 / N;
  for (int m = 0; m < out.hops; ++m) {
    for (int n = 0; n < N; ++n) {
      section[n] = x[n] * w[wrap_index(static_cast<long long>(L) * m - n, N)];
    }
    const auto spectrum = detail::forward_dft(section);
    for (int k = 0; k < N; ++k) out(m, k) = spectrum[k] * scale;
  }
  return out;
}

inline MeasurementGrid measure(const Signal& x, const WindowFamily& W, int L) {
  const int N = static_cast<int>(x.size());
  validate_family(W, N);
  check_hop(N, L);
  const int R = static_cast<int>(W.size());
  MeasurementGrid grid(R, N / L, N);
  for (int r = 0; r < R; ++r) {
    const auto X = stft_forward(x, W[r], L);
    for (int m = 0; m < grid.hops; ++m) {
      for (int k = 0; k < N; ++k) grid(r, m, k) = std::norm(X(m, k));
    }
  }
  return grid;
}

/// Y = grid + eps entrywise; the noise level becomes max |eps|.
inline MeasurementGrid corrupt(const MeasurementGrid& grid,
                               const std::vector<double>& eps) {
  if (eps.size() != grid.values.size()) {
    throw DimensionError("noise tensor has " + std::to_string(eps.size()) +
                         " entries, grid has " +
                         std::to_string(grid.values.size()));
  }
  MeasurementGrid out = grid;
  double level = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    out.values[i] += eps[i];
    level = std::max(level, std::abs(eps[i]));
  }
  out.noise_level = level;
  return out;
}

inline AggregateMeasurements aggregate(const MeasurementGrid& grid,
                                       const std::vector<WindowSupport>& supports) {
  if (static_cast<int>(supports.size()) != grid.R) {
    throw DimensionError("aggregate: " + std::to_string(supports.size()) +
                         " window supports for a grid with R = " +
                         std::to_string(grid.R));
  }
  if (grid.values.size() !=
      static_cast<std::size_t>(grid.R) * grid.hops * grid.N) {
    throw DimensionError("aggregate: grid storage does not match its shape");
  }
  AggregateMeasurements agg;
  agg.R = grid.R;
  agg.hops = grid.hops;
  agg.N = grid.N;
  agg.noise_level = grid.noise_level;
  agg.Z.assign(static_cast<std::size_t>(grid.R) * grid.hops, 0.0);
  agg.C.assign(static_cast<std::size_t>(grid.R) * grid.hops, Complex{});
  const int N = grid.N;
  for (int r = 0; r < grid.R; ++r) {
    const int shift = supports[r].length - 1;
    std::vector<Complex> phasor(N);
    for (int k = 0; k < N; ++k) {
      phasor[k] = std::polar(
          1.0, 2.0 * std::numbers::pi * static_cast<double>(wrap_index(
                                            static_cast<long long>(k) * shift, N)) /
                   N);
    }
    for (int m = 0; m < grid.hops; ++m) {
      double z = 0.0;
      Complex c{};
      for (int k = 0; k < N; ++k) {
        const double v = grid(r, m, k);
        z += v;
        c += v * phasor[k];
      }
      agg.Z[agg.index(r, m)] = z;
      agg.C[agg.index(r, m)] = c;
    }
  }
  return agg;
}

inline AggregateMeasurements aggregate(const MeasurementGrid& grid,
                                       const WindowFamily& W,
                                       const ProblemConfig& cfg) {
  validate_family(W, grid.N);
  return aggregate(grid, window_supports(W, cfg));
}

}  // namespace stftpr
