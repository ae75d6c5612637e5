#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stftpr/model.hpp"
#include "stftpr/robustness.hpp"
#include "stftpr/spectral.hpp"
#include "stftpr/stft.hpp"
#include "stftpr/support_graph.hpp"
#include "stftpr/window.hpp"

namespace stftpr {

/// Phase evidence available for one witness (r, m): the unit phasor of
/// C(r, m) and a strength used to rank witnesses.
struct WitnessEvidence {
  Complex phasor;
  double strength = 0.0;
};

using EvidenceLookup = std::function<WitnessEvidence(const Witness&)>;

enum class WitnessRule {
  strongest,     // largest strength, ties to the lexicographically first (r, m)
  first_usable,  // first witness whose strength clears the tolerance
};

/// Relative phase across one G~ edge. Endpoints follow the witness:
///   n1 = Lm - a(w_r),  n2 = Lm - a(w_r) - l(w_r) + 1   (mod N)
/// and relative_phase = x(n1) conj(x(n2)) / |x(n1) x(n2)|.
struct EdgePhaseEvidence {
  int n1 = 0;
  int n2 = 0;
  Witness witness;
  Complex c;               // evidence value (C(r, m) or its phasor)
  Complex window_phase;    // w_r(a + l - 1) conj(w_r(a)) / |.|
  Complex relative_phase;
  double strength = 0.0;
};

namespace detail {

inline Complex unit_phasor(Complex z) {
  const double a = std::abs(z);
  return a > 0.0 ? z / a : Complex{1.0, 0.0};
}

inline void check_supporting_lengths(const std::vector<WindowSupport>& supports, int N) {
  for (std::size_t r = 0; r < supports.size(); ++r) {
    if (2 * supports[r].length > N) {
      throw CertificationError("window " + std::to_string(r) + " has supporting length " +
                               std::to_string(supports[r].length) + " > N/2 = " +
                               std::to_string(N / 2));
    }
  }
}

}  // namespace detail

inline EdgePhaseEvidence edge_phase(const SupportGraphEdge& edge, const EvidenceLookup& lookup,
                                    const WindowFamily& W,
                                    const std::vector<WindowSupport>& supports,
                                    const ProblemConfig& cfg, WitnessRule rule,
                                    double degeneracy_tol) {
  if (edge.witnesses.empty()) {
    throw InternalError("edge (" + std::to_string(edge.n) + ", " + std::to_string(edge.n2) +
                        ") has no witnesses");
  }
  std::optional<Witness> chosen;
  WitnessEvidence best;
  for (const auto& w : edge.witnesses) {
    if (supports.at(w.r).length < 2) continue;
    const auto ev = lookup(w);
    if (!(ev.strength > degeneracy_tol)) continue;
    if (!chosen || ev.strength > best.strength) {
      chosen = w;
      best = ev;
      if (rule == WitnessRule::first_usable) break;
    }
  }
  if (!chosen) {
    throw DegenerateEdgeError("edge (" + std::to_string(edge.n) + ", " +
                                  std::to_string(edge.n2) +
                                  ") has no witness with evidence above " +
                                  std::to_string(degeneracy_tol),
                              edge.n, edge.n2);
  }
  const auto& s = supports[chosen->r];
  const auto& w = W[chosen->r];
  const long long head = static_cast<long long>(cfg.L) * chosen->m - s.anchor;

  EdgePhaseEvidence out;
  out.n1 = wrap_index(head, cfg.N);
  out.n2 = wrap_index(head - s.length + 1, cfg.N);
  out.witness = *chosen;
  out.c = best.phasor;
  out.strength = best.strength;
  out.window_phase = detail::unit_phasor(w[s.last(cfg.N)] * std::conj(w[s.anchor]));
  out.relative_phase = detail::unit_phasor(out.window_phase * best.phasor);
  return out;
}

/// Edge phase straight from the aggregate sums; the strongest witness is
/// the one with the largest |C(r, m)|.
inline EdgePhaseEvidence edge_phase(const SupportGraphEdge& edge,
                                    const AggregateMeasurements& agg, const WindowFamily& W,
                                    const ProblemConfig& cfg,
                                    WitnessRule rule = WitnessRule::strongest,
                                    double degeneracy_tol = 0.0) {
  const auto supports = window_supports(W, cfg);
  EvidenceLookup lookup = [&](const Witness& w) {
    const Complex c = agg.c(w.r, w.m);
    return WitnessEvidence{detail::unit_phasor(c), std::abs(c)};
  };
  auto out = edge_phase(edge, lookup, W, supports, cfg, rule, degeneracy_tol);
  out.c = agg.c(out.witness.r, out.witness.m);
  return out;
}

struct UsedWitness {
  int n1 = 0;
  int n2 = 0;
  Witness witness;
  double strength = 0.0;
};

struct ReconstructionDiagnostics {
  double noise_level = 0.0;
  double clamped_mass = 0.0;
  double imaginary_residue = 0.0;
  bool severe_clamping = false;
  double min_evidence = 0.0;  // smallest strength among used witnesses
  int tree_depth = 0;
  std::vector<UsedWitness> used_witnesses;
  /// |rho_e - u(n1) conj(u(n2))| for G~ edges left out of the tree.
  std::vector<double> cycle_residuals;
  std::string support_rule;
  double support_floor = 0.0;
  std::size_t measurements_consumed = 0;
  bool support_hint_mismatch = false;
};

struct ReconstructionResult {
  Signal estimate;
  SupportSet support;
  int root_vertex = -1;  // -1 for an empty support
  bool connected = true;
  std::vector<double> magnitudes_sq;
  ReconstructionDiagnostics diagnostics;
};

/// Walks the tree from its root (phase 0): crossing an edge towards n1
/// multiplies by relative_phase, towards n2 by its conjugate.
inline ReconstructionResult propagate(const std::vector<TreeEdge>& tree,
                                      const std::vector<EdgePhaseEvidence>& phases,
                                      const std::vector<double>& magnitudes_sq,
                                      const SupportSet& V) {
  if (tree.size() != phases.size()) {
    throw InternalError("propagate: one phase per tree edge is required");
  }
  const int N = static_cast<int>(magnitudes_sq.size());
  ReconstructionResult out;
  out.estimate.assign(N, Complex{});
  out.support = V;
  out.magnitudes_sq = magnitudes_sq;
  if (V.empty()) return out;

  std::vector<Complex> unit(N, Complex{});
  std::vector<bool> reached(N, false);
  out.root_vertex = *std::min_element(V.begin(), V.end());
  unit[out.root_vertex] = 1.0;
  reached[out.root_vertex] = true;
  int depth = 0;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& t = tree[i];
    const auto& ph = phases[i];
    if (!reached[t.parent]) throw InternalError("propagate: tree edges out of BFS order");
    if (t.child == ph.n1 && t.parent == ph.n2) {
      unit[t.child] = detail::unit_phasor(unit[t.parent] * ph.relative_phase);
    } else if (t.child == ph.n2 && t.parent == ph.n1) {
      unit[t.child] = detail::unit_phasor(unit[t.parent] * std::conj(ph.relative_phase));
    } else {
      throw InternalError("propagate: phase evidence does not match tree edge");
    }
    reached[t.child] = true;
    depth = std::max(depth, t.depth);
  }
  for (int v : V) {
    if (!reached[v]) {
      throw InternalError("propagate: vertex " + std::to_string(v) + " not reached");
    }
    out.estimate[v] = std::sqrt(std::max(magnitudes_sq[v], 0.0)) * unit[v];
  }
  out.diagnostics.tree_depth = depth;
  return out;
}

struct ReconstructOptions {
  WitnessRule witness_rule = WitnessRule::strongest;
  MagnitudeSolver solver = MagnitudeSolver::least_squares;
  std::optional<double> rank_tol;
  /// Prior min_{n in V(x)} |x(n)|; switches support detection to the
  /// half-minimum rule.
  std::optional<double> min_magnitude;
  /// Evidence below degeneracy_factor * N * noise_level is unusable.
  double degeneracy_factor = 1.0;
};

/// The 2NR/L reals the algebraic reconstruction needs: the energies
/// Z(r, m) and the arguments of C(r, m).
struct CompressedMeasurements {
  int R = 0;
  int hops = 0;
  int N = 0;
  std::vector<double> energy;  // Z(r, m), row-major (r, m)
  std::vector<double> phase;   // arg C(r, m)
  double noise_level = 0.0;

  std::size_t index(int r, int m) const { return static_cast<std::size_t>(r) * hops + m; }
  std::size_t real_count() const { return energy.size() + phase.size(); }
};

inline CompressedMeasurements compress(const AggregateMeasurements& agg) {
  CompressedMeasurements out{agg.R, agg.hops, agg.N, agg.Z, {}, agg.noise_level};
  out.phase.reserve(agg.C.size());
  for (const auto& c : agg.C) out.phase.push_back(std::arg(c));
  return out;
}

namespace detail {

/// Per-(r, m) evidence factory, called once the magnitudes are known.
using EvidenceFactory = std::function<EvidenceLookup(
    const std::vector<double>& magnitudes_sq, const std::vector<WindowSupport>& supports)>;

inline ReconstructionResult reconstruct_core(std::span<const double> Z, double noise_level,
                                             const EvidenceFactory& make_lookup,
                                             const WindowFamily& W, const ProblemConfig& cfg,
                                             const ReconstructOptions& opt,
                                             std::size_t consumed) {
  cfg.validate();
  validate_family(W, cfg.N);
  if (static_cast<int>(W.size()) != cfg.R) {
    throw DimensionError("configuration has R = " + std::to_string(cfg.R) + " but " +
                         std::to_string(W.size()) + " windows were given");
  }
  const int N = cfg.N;
  const auto supports = window_supports(W, cfg);
  const auto mats = certify_rank(W, cfg.L, opt.rank_tol);
  const auto beta = beta_coefficients(W);

  const auto mags = recover_magnitudes(Z, mats, beta, opt.solver);
  const double z_max = Z.empty() ? 0.0 : *std::max_element(Z.begin(), Z.end());

  // Support estimation.
  SupportSet V;
  ReconstructionDiagnostics diag;
  if (opt.min_magnitude) {
    Signal amplitude(N);
    for (int n = 0; n < N; ++n) amplitude[n] = std::sqrt(mags.magnitudes_sq[n]);
    const auto t = threshold_support(amplitude, *opt.min_magnitude);
    for (int n = 0; n < N; ++n) {
      if (t.signal[n] != Complex{}) V.push_back(n);
    }
    diag.support_rule = "half-minimum";
    diag.support_floor = t.threshold * t.threshold;
  } else {
    // Magnitudes within the worst-case error of zero cannot be told apart
    // from it; rounding in the measurements counts as noise of level
    // 64 eps max Z.
    const auto consts = stability_constants(W, mats, cfg);
    const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * z_max;
    const double gain = consts.A_norm1 * consts.W_norm2 * consts.W_norm2;
    const double peak = *std::max_element(mags.magnitudes_sq.begin(), mags.magnitudes_sq.end());
    const double floor = std::max(cfg.zero_tol * cfg.zero_tol * peak,
                                  gain * (noise_level + rounding));
    for (int n = 0; n < N; ++n) {
      if (mags.magnitudes_sq[n] > floor) V.push_back(n);
    }
    diag.support_rule = "noise-floor";
    diag.support_floor = floor;
  }

  // Connectivity is decided before the length hypothesis, which only the
  // phase formula needs.
  const auto graph = build_graph_Gtilde(V, W, cfg);
  if (auto comps = components(graph); comps.size() > 1) {
    const std::string what = "support graph Gtilde is disconnected (" +
                             std::to_string(comps.size()) + " components)";
    throw NonRetrievableError(what, std::move(comps));
  }
  check_supporting_lengths(supports, N);
  const auto lookup = make_lookup(mags.magnitudes_sq, supports);
  const double tol = opt.degeneracy_factor * N * noise_level + 1e-12 * z_max;

  std::vector<TreeEdge> tree;
  std::vector<EdgePhaseEvidence> phases;
  {
    // Witness choice happens inside edge_phase; the tree keeps the choice.
    std::vector<EdgePhaseEvidence> chosen;
    tree = spanning_tree(graph, [&](const SupportGraphEdge& e) {
      chosen.push_back(edge_phase(e, lookup, W, supports, cfg, opt.witness_rule, tol));
      return chosen.back().witness;
    });
    phases = std::move(chosen);
  }

  auto result = propagate(tree, phases, mags.magnitudes_sq, V);
  diag.tree_depth = result.diagnostics.tree_depth;
  diag.noise_level = noise_level;
  diag.clamped_mass = mags.diagnostics.clamped_mass;
  diag.imaginary_residue = mags.diagnostics.imaginary_residue;
  diag.severe_clamping = mags.diagnostics.severe_clamping;
  diag.measurements_consumed = consumed;
  diag.min_evidence = phases.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& ph : phases) {
    diag.used_witnesses.push_back({ph.n1, ph.n2, ph.witness, ph.strength});
    diag.min_evidence = std::min(diag.min_evidence, ph.strength);
  }

  std::vector<Complex> unit(N, Complex{});
  for (int v : V) unit[v] = detail::unit_phasor(result.estimate[v]);
  for (const auto& e : graph.edges) {
    const bool in_tree = std::any_of(tree.begin(), tree.end(), [&](const TreeEdge& t) {
      return t.edge.n == e.n && t.edge.n2 == e.n2;
    });
    if (in_tree) continue;
    try {
      const auto ph = edge_phase(e, lookup, W, supports, cfg, opt.witness_rule, tol);
      diag.cycle_residuals.push_back(
          std::abs(ph.relative_phase - unit[ph.n1] * std::conj(unit[ph.n2])));
    } catch (const DegenerateEdgeError&) {
      // unusable redundant edge; nothing to report
    }
  }
  result.diagnostics = std::move(diag);
  result.connected = true;
  return result;
}

}  // namespace detail

/// Three-step algebraic reconstruction: magnitudes from the energies,
/// support graph G~ on the detected support, phase differences propagated
/// along a BFS spanning tree. The root (smallest support index) gets
/// phase 0.
inline ReconstructionResult reconstruct(const MeasurementGrid& grid, const WindowFamily& W,
                                        const ProblemConfig& cfg,
                                        const ReconstructOptions& opt = {}) {
  cfg.validate();
  if (grid.N != cfg.N || grid.hops != cfg.hops() || grid.R != static_cast<int>(W.size())) {
    throw DimensionError("measurement grid shape does not match the configuration");
  }
  validate_family(W, cfg.N);
  const auto agg = aggregate(grid, W, cfg);
  detail::EvidenceFactory factory = [&agg](const std::vector<double>&,
                                           const std::vector<WindowSupport>&) {
    return EvidenceLookup([&agg](const Witness& w) {
      const Complex c = agg.c(w.r, w.m);
      return WitnessEvidence{detail::unit_phasor(c), std::abs(c)};
    });
  };
  return detail::reconstruct_core(agg.Z, grid.noise_level, factory, W, cfg, opt,
                                  grid.values.size());
}

/// Reconstruction from Z(r, m) and arg C(r, m) only. |C(r, m)| is not
/// read: witnesses are ranked by the evidence magnitude predicted from the
/// recovered magnitudes, sqrt(|x(n1)|^2 |x(n2)|^2) |w_r(a) w_r(a + l - 1)| / N,
/// which equals |C(r, m)| on exact data.
inline ReconstructionResult reconstruct_compressed(const CompressedMeasurements& data,
                                                   const WindowFamily& W,
                                                   const ProblemConfig& cfg,
                                                   const std::optional<SupportSet>& support_hint = {},
                                                   const ReconstructOptions& opt = {}) {
  cfg.validate();
  if (data.N != cfg.N || data.hops != cfg.hops() || data.R != static_cast<int>(W.size()) ||
      data.energy.size() != static_cast<std::size_t>(data.R) * data.hops ||
      data.phase.size() != data.energy.size()) {
    throw DimensionError("compressed measurements do not match the configuration");
  }
  validate_family(W, cfg.N);
  detail::EvidenceFactory factory = [&](const std::vector<double>& mags,
                                        const std::vector<WindowSupport>& supports) {
    return EvidenceLookup([&data, &W, &cfg, mags, supports](const Witness& w) {
      const auto& s = supports[w.r];
      const long long head = static_cast<long long>(cfg.L) * w.m - s.anchor;
      const int n1 = wrap_index(head, cfg.N);
      const int n2 = wrap_index(head - s.length + 1, cfg.N);
      const double window_product = std::abs(W[w.r][s.anchor] * W[w.r][s.last(cfg.N)]);
      const double strength =
          std::sqrt(mags[n1] * mags[n2]) * window_product / static_cast<double>(cfg.N);
      return WitnessEvidence{std::polar(1.0, data.phase[data.index(w.r, w.m)]), strength};
    });
  };
  auto result = detail::reconstruct_core(data.energy, data.noise_level, factory, W, cfg, opt,
                                         data.real_count());
  if (support_hint) {
    SupportSet hint = *support_hint;
    std::sort(hint.begin(), hint.end());
    result.diagnostics.support_hint_mismatch = hint != result.support;
  }
  return result;
}

inline ReconstructionResult reconstruct_compressed(const AggregateMeasurements& agg,
                                                   const WindowFamily& W,
                                                   const ProblemConfig& cfg,
                                                   const std::optional<SupportSet>& support_hint = {},
                                                   const ReconstructOptions& opt = {}) {
  return reconstruct_compressed(compress(agg), W, cfg, support_hint, opt);
}

}  // namespace stftpr
