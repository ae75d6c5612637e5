#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "stftpr/model.hpp"
#include "stftpr/spectral.hpp"
#include "stftpr/window.hpp"

namespace stftpr {

/// ||W||_2, ||W||_* and ||A||_1 for a certified window family.
struct StabilityConstants {
  int N = 0;
  double W_norm2 = 0.0;  // (sum_r sum_n |w_r(n)|^2)^{1/2}
  double W_star = 0.0;   // min_r |w_r(a_r) w_r(a_r + l_r - 1)|
  double A_norm1 = 0.0;  // sum_m sum_{j,j'} |a_m(j, j')|
};

inline StabilityConstants stability_constants(const WindowFamily& W,
                                              const ModulationMatrices& mats,
                                              const ProblemConfig& cfg) {
  validate_family(W, cfg.N);
  if (!mats.certified) {
    throw CertificationError("stability constants need full-rank modulation matrices",
                             mats.failing_m);
  }
  StabilityConstants c;
  c.N = cfg.N;
  double energy = 0.0;
  for (const auto& w : W) {
    for (const auto& v : w) energy += std::norm(v);
  }
  c.W_norm2 = std::sqrt(energy);

  // Length-1 windows contribute |w(a)|^2: both interval endpoints are a.
  c.W_star = std::numeric_limits<double>::infinity();
  const auto supports = window_supports(W, cfg);
  for (std::size_t r = 0; r < W.size(); ++r) {
    const auto& s = supports[r];
    c.W_star = std::min(c.W_star, std::abs(W[r][s.anchor] * W[r][s.last(cfg.N)]));
  }

  for (int m = 0; m < mats.hops(); ++m) {
    c.A_norm1 += mats.normal_inverse(m).cwiseAbs().sum();
  }
  return c;
}

struct ErrorBudget {
  double noise_level = 0.0;
  double admissible_level = 0.0;  // min|x|^2 / (4 ||A||_1 ||W||_2^2)
  bool admissible = false;
  double magnitude_bound = 0.0;   // ||A||_1 ||W||_2^2 |eps|
  double phase_bound = 0.0;       // 2 N^3 |eps| / (||W||_* min|x|^2)
  double min_support_magnitude_sq = 0.0;
};

/// Worst-case error budget given min_{n in V(x)} |x(n)|^2, either from a
/// reference signal or supplied as prior knowledge.
inline ErrorBudget error_budget(const StabilityConstants& c, double noise_level,
                                double min_support_magnitude_sq) {
  if (!(c.W_norm2 > 0.0 && c.W_star > 0.0 && c.A_norm1 > 0.0)) {
    throw UndefinedBudgetError("stability constants must be positive");
  }
  if (!(min_support_magnitude_sq > 0.0)) {
    throw UndefinedBudgetError("minimal support magnitude must be positive");
  }
  if (!(noise_level >= 0.0)) throw UndefinedBudgetError("noise level must be nonnegative");
  const double gain = c.A_norm1 * c.W_norm2 * c.W_norm2;
  ErrorBudget b;
  b.noise_level = noise_level;
  b.min_support_magnitude_sq = min_support_magnitude_sq;
  b.admissible_level = min_support_magnitude_sq / (4.0 * gain);
  b.admissible = noise_level <= b.admissible_level;
  b.magnitude_bound = gain * noise_level;
  const double n = static_cast<double>(c.N);
  b.phase_bound = 2.0 * n * n * n * noise_level / (c.W_star * min_support_magnitude_sq);
  return b;
}

/// min_{n in V(x)} |x(n)|^2 under the relative zero rule.
inline double min_support_magnitude_sq(const Signal& x, const ProblemConfig& cfg) {
  const auto V = support(x, cfg);
  if (V.empty()) throw UndefinedBudgetError("signal has empty support");
  double m = std::numeric_limits<double>::infinity();
  for (int n : V) m = std::min(m, std::norm(x[n]));
  return m;
}

inline ErrorBudget error_budget(const StabilityConstants& c, double noise_level,
                                const Signal& x, const ProblemConfig& cfg) {
  return error_budget(c, noise_level, min_support_magnitude_sq(x, cfg));
}

struct ThresholdedEstimate {
  Signal signal;
  double threshold = 0.0;  // half the minimal support magnitude
};

/// Zeroes every entry with |x(n)| <= min_support_magnitude / 2.
inline ThresholdedEstimate threshold_support(const Signal& estimate,
                                             double min_support_magnitude) {
  if (!(min_support_magnitude > 0.0)) {
    throw InvalidPriorError("minimal support magnitude must be positive, got " +
                            std::to_string(min_support_magnitude));
  }
  ThresholdedEstimate out{estimate, 0.5 * min_support_magnitude};
  for (auto& v : out.signal) {
    if (std::abs(v) <= out.threshold) v = Complex{};
  }
  return out;
}

/// min_beta max_{n in V} |u_est(n) - e^{i beta} u(n)| with u = x / |x|.
/// Each term is 2 |sin((phi_n - beta) / 2)| for phi_n = arg(u_est conj(u)),
/// so the optimal beta is the centre of the shortest arc covering every
/// phi_n, found from the widest gap between sorted angles.
inline double support_phase_error(const Signal& estimate, const Signal& x,
                                  const SupportSet& V) {
  if (estimate.size() != x.size()) throw DimensionError("support_phase_error: length mismatch");
  std::vector<double> phi;
  for (int n : V) {
    if (estimate[n] == Complex{} || x[n] == Complex{}) return 2.0;  // no phase to compare
    phi.push_back(std::arg(estimate[n] * std::conj(x[n])));
  }
  if (phi.size() < 2) return 0.0;
  std::sort(phi.begin(), phi.end());
  const double two_pi = 2.0 * std::numbers::pi;
  double gap = phi.front() + two_pi - phi.back();
  for (std::size_t i = 1; i < phi.size(); ++i) gap = std::max(gap, phi[i] - phi[i - 1]);
  const double half_arc = 0.5 * (two_pi - gap);
  return 2.0 * std::sin(0.5 * half_arc);
}

}  // namespace stftpr
