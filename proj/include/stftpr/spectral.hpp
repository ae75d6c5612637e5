#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stftpr/detail/fft.hpp"
#include "stftpr/model.hpp"
#include "stftpr/stft.hpp"
#include "stftpr/window.hpp"

namespace stftpr {

/// beta_r(k) = (1/N) sum_n |w_r(n)|^2 e^{-2 pi i k n / N}, row-major (r, k).
struct SpectralCoefficients {
  int R = 0;
  int N = 0;
  std::vector<Complex> beta;

  Complex operator()(int r, int k) const {
    return beta[static_cast<std::size_t>(r) * N + k];
  }
};

inline SpectralCoefficients beta_coefficients(const WindowFamily& W) {
  if (W.empty()) throw ConfigError("window family is empty");
  const int N = static_cast<int>(W.front().size());
  validate_family(W, N);
  SpectralCoefficients out{static_cast<int>(W.size()), N, {}};
  out.beta.reserve(W.size() * N);
  std::vector<Complex> energy(N);
  for (const auto& w : W) {
    for (int n = 0; n < N; ++n) energy[n] = std::norm(w[n]);
    const auto spec = detail::forward_dft(energy);
    for (int k = 0; k < N; ++k) out.beta.push_back(spec[k] / static_cast<double>(N));
  }
  return out;
}

inline double default_rank_tol(int R, int L) {
  return std::max(R, L) * std::numeric_limits<double>::epsilon() * 64.0;
}

/// The R x L matrices A_m(r, j) = beta_r(m + j N / L), one per hop m, with
/// their numerical ranks. A singular value counts when it exceeds
/// tol * sigma_max, sigma_max being the largest singular value over all m.
struct ModulationMatrices {
  int R = 0;
  int L = 0;
  int N = 0;
  double tol = 0.0;
  std::vector<Eigen::MatrixXcd> A;
  std::vector<Eigen::VectorXd> singular_values;
  std::vector<int> ranks;
  std::vector<int> failing_m;
  bool certified = false;
  /// Smallest L-th singular value over all m (0 when R < L).
  double singular_value_min = 0.0;
  /// L = 1 only: min_m sum_r |beta_r(m)|^2.
  std::optional<double> hop_one_energy_min;
  /// L = N only: rank of the R x N matrix (|w_r(n)|^2).
  std::optional<int> mask_matrix_rank;

  int hops() const { return N / L; }

  /// (A_m^H A_m)^{-1}, entries a_m(j, j'). Requires rank(A_m) = L.
  Eigen::MatrixXcd normal_inverse(int m) const {
    return normal_inverse_extended(m).cast<Complex>();
  }

  /// Same entries in extended precision. Forming the Gram matrix squares the
  /// condition number of A_m, so the explicit path works in long double.
  Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>
  normal_inverse_extended(int m) const {
    if (ranks.at(m) != L) {
      throw CertificationError("A_" + std::to_string(m) + " is rank deficient",
                               {m});
    }
    using MatrixXcld =
        Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
    const MatrixXcld a = A[m].cast<std::complex<long double>>();
    const MatrixXcld gram = a.adjoint() * a;
    return gram.fullPivLu().inverse();
  }

  /// Least-squares solution of A_m alpha = b.
  Eigen::VectorXcd solve(int m, const Eigen::VectorXcd& b) const {
    return A[m].colPivHouseholderQr().solve(b);
  }
};

namespace detail {

inline int numerical_rank(const Eigen::VectorXd& sv, double cutoff) {
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return rank;
}

}  // namespace detail

/// Builds every A_m and reports ranks without throwing.
inline ModulationMatrices modulation_matrices(const WindowFamily& W, int L,
                                              std::optional<double> rank_tol = {}) {
  const auto beta = beta_coefficients(W);
  const int N = beta.N;
  const int R = beta.R;
  check_hop(N, L);
  const int hops = N / L;

  ModulationMatrices mats;
  mats.R = R;
  mats.L = L;
  mats.N = N;
  mats.tol = rank_tol.value_or(default_rank_tol(R, L));
  mats.A.reserve(hops);
  double sigma_max = 0.0;
  for (int m = 0; m < hops; ++m) {
    Eigen::MatrixXcd A(R, L);
    for (int r = 0; r < R; ++r) {
      for (int j = 0; j < L; ++j) A(r, j) = beta(r, m + j * hops);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    Eigen::VectorXd sv = svd.singularValues();
    if (sv.size() > 0) sigma_max = std::max(sigma_max, sv[0]);
    mats.singular_values.push_back(std::move(sv));
    mats.A.push_back(std::move(A));
  }

  const double cutoff = mats.tol * sigma_max;
  mats.singular_value_min = std::numeric_limits<double>::infinity();
  for (int m = 0; m < hops; ++m) {
    const auto& sv = mats.singular_values[m];
    const int rank = sigma_max > 0.0 ? detail::numerical_rank(sv, cutoff) : 0;
    mats.ranks.push_back(rank);
    if (rank < L) mats.failing_m.push_back(m);
    const double sigma_l = (sv.size() >= L) ? sv[L - 1] : 0.0;
    mats.singular_value_min = std::min(mats.singular_value_min, sigma_l);
  }
  if (hops == 0) mats.singular_value_min = 0.0;
  mats.certified = mats.failing_m.empty();

  if (L == 1) {
    double emin = std::numeric_limits<double>::infinity();
    for (int m = 0; m < N; ++m) {
      double e = 0.0;
      for (int r = 0; r < R; ++r) e += std::norm(beta(r, m));
      emin = std::min(emin, e);
    }
    mats.hop_one_energy_min = emin;
  }
  if (L == N) {
    Eigen::MatrixXd masks(R, N);
    for (int r = 0; r < R; ++r) {
      for (int n = 0; n < N; ++n) masks(r, n) = std::norm(W[r][n]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(masks);
    const auto& sv = svd.singularValues();
    const double top = sv.size() > 0 ? sv[0] : 0.0;
    mats.mask_matrix_rank =
        top > 0.0 ? detail::numerical_rank(sv, mats.tol * top) : 0;
  }
  return mats;
}

/// Same as modulation_matrices, but a rank-deficient A_m is an error.
inline ModulationMatrices certify_rank(const WindowFamily& W, int L,
                                       std::optional<double> rank_tol = {}) {
  auto mats = modulation_matrices(W, L, rank_tol);
  if (!mats.certified) {
    std::string list;
    for (int m : mats.failing_m) {
      if (!list.empty()) list += ", ";
      list += std::to_string(m);
    }
    throw CertificationError(
        "modulation matrices are rank deficient (need rank " +
            std::to_string(L) + ") at m = " + list,
        mats.failing_m);
  }
  return mats;
}

enum class MagnitudeSolver { least_squares, normal_equations };

struct MagnitudeDiagnostics {
  double imaginary_residue = 0.0;  // max |Im| discarded after the inverse DFT
  double clamped_mass = 0.0;       // sum of negative parts set to zero
  double total_mass = 0.0;         // sum of the clamped magnitudes
  double solve_residual = 0.0;     // max_m ||A_m alpha_m - b_m||
  bool severe_clamping = false;    // clamped_mass > 10% of total_mass
};

struct MagnitudeSpectrum {
  std::vector<Complex> alpha;         // alpha(k), k in [0, N)
  std::vector<double> magnitudes_sq;  // |x(n)|^2 with negatives clamped to 0
  std::vector<double> raw;            // real part before clamping
  MagnitudeDiagnostics diagnostics;
};

namespace detail {

inline MagnitudeSpectrum finish_magnitudes(std::vector<Complex> alpha,
                                           std::vector<Complex> values,
                                           double solve_residual) {
  MagnitudeSpectrum out;
  out.alpha = std::move(alpha);
  out.raw.resize(values.size());
  out.magnitudes_sq.resize(values.size());
  auto& d = out.diagnostics;
  d.solve_residual = solve_residual;
  for (std::size_t n = 0; n < values.size(); ++n) {
    d.imaginary_residue = std::max(d.imaginary_residue, std::abs(values[n].imag()));
    const double v = values[n].real();
    out.raw[n] = v;
    if (v < 0.0) {
      d.clamped_mass += -v;
      out.magnitudes_sq[n] = 0.0;
    } else {
      out.magnitudes_sq[n] = v;
      d.total_mass += v;
    }
  }
  d.severe_clamping = d.clamped_mass > 0.1 * d.total_mass && d.clamped_mass > 0.0;
  return out;
}

}  // namespace detail

/// |x(n)|^2 from the energies Z(r, m) (row-major (r, m)).
///
/// For each m the R-vector b_m(r) = (L/N) sum_m' Z(r, m') e^{-2 pi i m m' L / N}
/// satisfies A_m alpha_m = b_m with alpha_m(j) = alpha(m + j N / L); the
/// least-squares solve recovers alpha, and an inverse DFT gives |x|^2.
/// The normal-equations solver evaluates the same quantities through
/// (A_m^H A_m)^{-1} and explicit sums, sharing no code with the FFT path.
inline MagnitudeSpectrum recover_magnitudes(std::span<const double> Z,
                                            const ModulationMatrices& mats,
                                            const SpectralCoefficients& beta,
                                            MagnitudeSolver solver =
                                                MagnitudeSolver::least_squares) {
  if (!mats.certified) {
    throw CertificationError("magnitude recovery needs certified modulation matrices",
                             mats.failing_m);
  }
  const int N = mats.N;
  const int L = mats.L;
  const int R = mats.R;
  const int hops = mats.hops();
  if (static_cast<int>(Z.size()) != R * hops) {
    throw DimensionError("expected " + std::to_string(R * hops) +
                         " energies, got " + std::to_string(Z.size()));
  }
  if (beta.R != R || beta.N != N) {
    throw DimensionError("spectral coefficients do not match the window family");
  }

  std::vector<Complex> alpha(N);
  double residual = 0.0;

  if (solver == MagnitudeSolver::least_squares) {
    // b_m(r) is a length-(N/L) DFT of Z(r, .), scaled by L/N.
    std::vector<std::vector<Complex>> b(R);
    std::vector<Complex> row(hops);
    for (int r = 0; r < R; ++r) {
      for (int m = 0; m < hops; ++m) row[m] = Z[static_cast<std::size_t>(r) * hops + m];
      b[r] = detail::forward_dft(row);
      for (auto& v : b[r]) v /= static_cast<double>(hops);
    }
    for (int m = 0; m < hops; ++m) {
      Eigen::VectorXcd bm(R);
      for (int r = 0; r < R; ++r) bm[r] = b[r][m];
      const Eigen::VectorXcd am = mats.solve(m, bm);
      residual = std::max(residual, (mats.A[m] * am - bm).norm());
      for (int j = 0; j < L; ++j) alpha[m + j * hops] = am[j];
    }
    return detail::finish_magnitudes(alpha, detail::backward_dft(alpha), residual);
  }

  // Normal equations: alpha(m + jN/L) = (L/N) sum_{j', m'} a_m(j, j')
  //   e^{-2 pi i m m' L / N} sum_r conj(beta_r(m + j'N/L)) Z(r, m').
  // Accumulated in long double, see normal_inverse_extended.
  using cld = std::complex<long double>;
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  auto unit = [&](long long num, int den) {
    const long double ang = two_pi * static_cast<long double>(wrap_index(num, den)) / den;
    return cld{std::cos(ang), std::sin(ang)};
  };
  std::vector<cld> alpha_ext(N);
  for (int m = 0; m < hops; ++m) {
    const auto a = mats.normal_inverse_extended(m);
    for (int j = 0; j < L; ++j) {
      cld acc{};
      for (int jp = 0; jp < L; ++jp) {
        for (int mp = 0; mp < hops; ++mp) {
          cld g{};
          for (int r = 0; r < R; ++r) {
            const Complex br = beta(r, m + jp * hops);
            g += std::conj(cld(br.real(), br.imag())) *
                 static_cast<long double>(Z[static_cast<std::size_t>(r) * hops + mp]);
          }
          acc += a(j, jp) * unit(-static_cast<long long>(m) * mp, hops) * g;
        }
      }
      alpha_ext[m + j * hops] = acc / static_cast<long double>(hops);
    }
  }
  std::vector<Complex> values(N);
  for (int n = 0; n < N; ++n) {
    cld s{};
    for (int k = 0; k < N; ++k) s += alpha_ext[k] * unit(static_cast<long long>(k) * n, N);
    values[n] = Complex(static_cast<double>(s.real()), static_cast<double>(s.imag()));
  }
  for (int k = 0; k < N; ++k) {
    alpha[k] = Complex(static_cast<double>(alpha_ext[k].real()),
                       static_cast<double>(alpha_ext[k].imag()));
  }
  return detail::finish_magnitudes(alpha, std::move(values), residual);
}

inline MagnitudeSpectrum recover_magnitudes(const AggregateMeasurements& agg,
                                            const ModulationMatrices& mats,
                                            const SpectralCoefficients& beta,
                                            const ProblemConfig& cfg,
                                            MagnitudeSolver solver =
                                                MagnitudeSolver::least_squares) {
  if (agg.N != cfg.N || mats.N != cfg.N || mats.L != cfg.L || agg.R != mats.R) {
    throw DimensionError("aggregate measurements do not match the configuration");
  }
  return recover_magnitudes(std::span<const double>(agg.Z), mats, beta, solver);
}

}  // namespace stftpr
