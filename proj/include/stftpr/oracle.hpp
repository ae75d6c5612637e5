#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stftpr/model.hpp"
#include "stftpr/stft.hpp"
#include "stftpr/window.hpp"

// Brute-force reference implementations. Nothing here goes through an FFT
// or a matrix factorization.
namespace stftpr::oracle {

/// Literal triple loop: X(m, k) = (1/N) sum_n x(n) w(Lm - n) e^{-2 pi i k n / N}.
inline StftCoefficients dft_stft_direct(const Signal& x, const Window& w, int L) {
  const int N = static_cast<int>(x.size());
  if (static_cast<int>(w.size()) != N) throw DimensionError("window/signal length mismatch");
  check_hop(N, L);
  if (max_abs(w) == 0.0) throw InvalidWindowError("window is identically zero");
  StftCoefficients out{N / L, N, std::vector<Complex>(static_cast<std::size_t>(N) * (N / L))};
  for (int m = 0; m < N / L; ++m) {
    for (int k = 0; k < N; ++k) {
      Complex s{};
      for (int n = 0; n < N; ++n) {
        const double ang = -2.0 * std::numbers::pi *
                           static_cast<double>(wrap_index(static_cast<long long>(k) * n, N)) / N;
        s += x[n] * w[wrap_index(static_cast<long long>(L) * m - n, N)] * std::polar(1.0, ang);
      }
      out(m, k) = s / static_cast<double>(N);
    }
  }
  return out;
}

inline MeasurementGrid measure_direct(const Signal& x, const WindowFamily& W, int L) {
  const int N = static_cast<int>(x.size());
  validate_family(W, N);
  MeasurementGrid grid(static_cast<int>(W.size()), N / L, N);
  for (int r = 0; r < grid.R; ++r) {
    const auto X = dft_stft_direct(x, W[r], L);
    for (int m = 0; m < grid.hops; ++m) {
      for (int k = 0; k < N; ++k) grid(r, m, k) = std::norm(X(m, k));
    }
  }
  return grid;
}

struct OracleReport {
  std::string case_id;
  double fast_value = 0.0;    // max |fast|
  double oracle_value = 0.0;  // max |oracle|
  double abs_error = 0.0;     // max |fast - oracle|
  double rel_error = 0.0;     // abs_error / oracle_value
  double tolerance = 0.0;
  bool pass = false;
};

/// Relative comparison in the max norm; near-zero references (max |oracle|
/// <= tolerance) are judged on the absolute error instead.
template <typename T>
OracleReport compare(std::string case_id, const std::vector<T>& fast,
                     const std::vector<T>& reference, double tolerance) {
  if (fast.size() != reference.size()) throw DimensionError("compare: size mismatch");
  OracleReport rep;
  rep.case_id = std::move(case_id);
  rep.tolerance = tolerance;
  for (std::size_t i = 0; i < fast.size(); ++i) {
    rep.fast_value = std::max(rep.fast_value, static_cast<double>(std::abs(fast[i])));
    rep.oracle_value = std::max(rep.oracle_value, static_cast<double>(std::abs(reference[i])));
    rep.abs_error = std::max(rep.abs_error, static_cast<double>(std::abs(fast[i] - reference[i])));
  }
  rep.rel_error = rep.oracle_value > 0.0 ? rep.abs_error / rep.oracle_value : rep.abs_error;
  rep.pass = rep.oracle_value <= tolerance ? rep.abs_error <= tolerance
                                           : rep.rel_error <= tolerance;
  return rep;
}

inline constexpr std::size_t kSearchCap = 1'000'000;

/// Every candidate built from `magnitude_set` x {e^{2 pi i p / phase_steps}}
/// whose measurement grid matches `grid` within 1e-9 (max abs). A zero
/// magnitude contributes a single candidate value.
inline std::vector<Signal> exhaustive_ambiguity_search(const MeasurementGrid& grid,
                                                       const WindowFamily& W,
                                                       const ProblemConfig& cfg, int phase_steps,
                                                       const std::vector<double>& magnitude_set) {
  cfg.validate();
  if (cfg.N > 4) throw SearchLimitError("exhaustive search is limited to N <= 4");
  if (phase_steps < 1 || phase_steps > 16) {
    throw SearchLimitError("phase_steps must lie in [1, 16]");
  }
  if (grid.N != cfg.N || grid.hops != cfg.hops() || grid.R != static_cast<int>(W.size())) {
    throw DimensionError("grid shape does not match the configuration");
  }
  std::vector<Complex> values;
  for (double mag : magnitude_set) {
    if (mag == 0.0) {
      if (std::find(values.begin(), values.end(), Complex{}) == values.end()) {
        values.emplace_back();
      }
      continue;
    }
    for (int p = 0; p < phase_steps; ++p) {
      values.push_back(std::polar(mag, 2.0 * std::numbers::pi * p / phase_steps));
    }
  }
  std::vector<Signal> matches;
  if (values.empty()) return matches;

  double total = 1.0;
  for (int i = 0; i < cfg.N; ++i) total *= static_cast<double>(values.size());
  if (total > static_cast<double>(kSearchCap)) {
    throw SearchLimitError("search space of " + std::to_string(static_cast<long long>(total)) +
                           " candidates exceeds the cap");
  }
  const auto count = static_cast<std::size_t>(total);
  Signal candidate(cfg.N);
  for (std::size_t code = 0; code < count; ++code) {
    std::size_t c = code;
    for (int n = 0; n < cfg.N; ++n) {
      candidate[n] = values[c % values.size()];
      c /= values.size();
    }
    const auto g = measure_direct(candidate, W, cfg.L);
    double diff = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      diff = std::max(diff, std::abs(g.values[i] - grid.values[i]));
    }
    if (diff <= 1e-9) matches.push_back(candidate);
  }
  return matches;
}

}  // namespace stftpr::oracle
