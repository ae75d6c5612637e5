#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "stftpr/model.hpp"

namespace stftpr {

/// Window w(0..N-1) with period-N extension.
using Window = std::vector<Complex>;

/// Ordered family {w_r}, r = 0..R-1.
using WindowFamily = std::vector<Window>;

/// Minimal cyclic interval [anchor, anchor + length - 1] + N*Z outside of
/// which the window vanishes.
struct WindowSupport {
  int length = 0;
  int anchor = 0;

  /// Right endpoint a + l - 1 reduced mod N.
  int last(int N) const { return wrap_index(anchor + length - 1, N); }
};

inline void validate_family(const WindowFamily& W, int N) {
  if (W.empty()) throw ConfigError("window family is empty");
  for (std::size_t r = 0; r < W.size(); ++r) {
    if (static_cast<int>(W[r].size()) != N) {
      throw DimensionError("window " + std::to_string(r) + " has length " +
                           std::to_string(W[r].size()) + ", expected " +
                           std::to_string(N));
    }
  }
}

/// Supporting length and anchor. Among several minimal intervals the one
/// with the smallest anchor wins; a window without zeros gets anchor 0.
inline WindowSupport window_support(const Window& w, const ProblemConfig& cfg) {
  if (static_cast<int>(w.size()) != cfg.N) {
    throw DimensionError("window length " + std::to_string(w.size()) +
                         " does not match N = " + std::to_string(cfg.N));
  }
  const auto mask = nonzero_mask(w, cfg.zero_tol);
  std::vector<int> nz;
  for (int n = 0; n < cfg.N; ++n) {
    if (mask[n]) nz.push_back(n);
  }
  if (nz.empty()) throw InvalidWindowError("window is identically zero");

  // The complement of the minimal interval is the longest cyclic run of
  // zeros; the interval starts right after it.
  const int k = static_cast<int>(nz.size());
  int best_gap = -1;
  int best_anchor = 0;
  for (int i = 0; i < k; ++i) {
    const int next = nz[(i + 1) % k];
    const int gap = wrap_index(static_cast<long long>(next) - nz[i] - 1, cfg.N);
    if (gap > best_gap || (gap == best_gap && next < best_anchor)) {
      best_gap = gap;
      best_anchor = next;
    }
  }
  return {cfg.N - best_gap, best_anchor};
}

inline std::vector<WindowSupport> window_supports(const WindowFamily& W,
                                                  const ProblemConfig& cfg) {
  std::vector<WindowSupport> out;
  out.reserve(W.size());
  for (const auto& w : W) out.push_back(window_support(w, cfg));
  return out;
}

/// Nonzero masks of every window under the relative zero rule.
inline std::vector<std::vector<bool>> window_masks(const WindowFamily& W,
                                                   double zero_tol) {
  std::vector<std::vector<bool>> out;
  out.reserve(W.size());
  for (const auto& w : W) out.push_back(nonzero_mask(w, zero_tol));
  return out;
}

}  // namespace stftpr
