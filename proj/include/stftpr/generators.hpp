#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "stftpr/model.hpp"
#include "stftpr/window.hpp"

// Seeded instance generators. Every draw goes through the caller's engine.
namespace stftpr::gen {

using Rng = std::mt19937_64;

namespace detail {

inline Complex random_entry(Rng& rng) {
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  const double a = mag(rng);
  return std::polar(a, ang(rng));
}

}  // namespace detail

/// w(n) = 1 for n in [0, l), 0 elsewhere.
inline Window rectangular(int N, int l) {
  if (l < 1 || l > N) throw ConfigError("rectangular window length must lie in [1, N]");
  Window w(N, Complex{});
  for (int n = 0; n < l; ++n) w[n] = 1.0;
  return w;
}

/// Random complex entries (magnitudes in [0.5, 1.5]) on the cyclic interval
/// [anchor, anchor + l - 1], zero elsewhere.
inline Window random_support(int N, int l, Rng& rng, int anchor = 0) {
  if (l < 1 || l > N) throw ConfigError("window supporting length must lie in [1, N]");
  Window w(N, Complex{});
  for (int i = 0; i < l; ++i) w[wrap_index(anchor + i, N)] = detail::random_entry(rng);
  return w;
}

/// Masks for L = N: window r < N lives on {r, r + 1}; any further windows
/// get random length-2 supports.
inline WindowFamily masks(int N, int R, Rng& rng) {
  if (N < 2) throw ConfigError("masks need N >= 2");
  WindowFamily W;
  W.reserve(R);
  std::uniform_int_distribution<int> pick(0, N - 1);
  for (int r = 0; r < R; ++r) {
    const int anchor = r < N ? r : pick(rng);
    W.push_back(random_support(N, 2, rng, anchor));
  }
  return W;
}

/// Random complex signal on the given support (magnitudes in [0.5, 1.5]).
inline Signal random_signal(int N, Rng& rng, const SupportSet& V) {
  Signal x(N, Complex{});
  for (int n : V) x.at(n) = detail::random_entry(rng);
  return x;
}

inline Signal random_signal(int N, Rng& rng) {
  SupportSet all(N);
  for (int n = 0; n < N; ++n) all[n] = n;
  return random_signal(N, rng, all);
}

/// Ones at 0 and floor(N/2), zero elsewhere.
inline Signal two_spike(int N) {
  Signal x(N, Complex{});
  x[0] = 1.0;
  x[N / 2] = 1.0;
  return x;
}

inline Signal delta(int N, int at = 0, Complex value = 1.0) {
  Signal x(N, Complex{});
  x.at(at) = value;
  return x;
}

/// I.i.d. uniform noise on [-level, level].
inline std::vector<double> uniform_noise(std::size_t count, double level, Rng& rng) {
  std::vector<double> eps(count, 0.0);
  if (level <= 0.0) return eps;
  std::uniform_real_distribution<double> dist(-level, level);
  for (auto& e : eps) e = dist(rng);
  return eps;
}

}  // namespace stftpr::gen
