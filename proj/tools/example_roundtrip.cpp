// Smallest end-to-end use of the library: measure, recover, compare.
#include <cstdio>

#include "stftpr/stftpr.hpp"

int main() {
  using namespace stftpr;
  gen::Rng rng(7);

  ProblemConfig cfg;
  cfg.N = 16;
  cfg.L = 2;
  cfg.R = 3;

  // supporting length 6: gcd(5, 16) = 1, so the support graph is connected
  WindowFamily W;
  for (int r = 0; r < cfg.R; ++r) W.push_back(gen::random_support(cfg.N, 6, rng, r));
  const Signal x = gen::random_signal(cfg.N, rng);

  const auto grid = measure(x, W, cfg.L);
  try {
    const auto res = reconstruct(grid, W, cfg);
    const auto d = phase_distance(x, res.estimate);
    std::printf("N=%d L=%d R=%d  distance up to global phase: %.3e\n", cfg.N, cfg.L, cfg.R,
                d.distance);
  } catch (const std::exception& e) {
    std::printf("not recoverable: %s\n", e.what());
    return 1;
  }
  return 0;
}
