// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>

#include "instances.hpp"
#include "stftpr/oracle.hpp"

using namespace stftpr;
namespace st = stftpr::testing;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Certified instances over the full (N, L, R) sweep, with connected G~
// on the signal's support. Shared by criteria 1, 2 and 7.
std::vector<st::Instance> sweep_instances(std::uint64_t seed, int per_config) {
  gen::Rng rng(seed);
  std::vector<st::Instance> out;
  for (int N : {4, 8, 12, 16}) {
    for (int L : st::divisors(N)) {
      for (int R : {L, L + 1, L + 2}) {
        for (int t = 0; t < per_config; ++t) {
          auto inst = st::try_certified_instance(N, L, R, rng);
          if (inst) out.push_back(std::move(*inst));
        }
      }
    }
  }
  return out;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict exact_recovery(const std::vector<st::Instance>& insts) {
  Verdict v;
  double worst = 0.0;
  int ok = 0;
  for (const auto& in : insts) {
    try {
      const auto res = reconstruct(measure(in.x, in.W, in.cfg.L), in.W, in.cfg);
      const double rel = phase_distance(res.estimate, in.x).distance / l2_norm(in.x);
      worst = std::max(worst, rel);
      if (rel <= 1e-8) ++ok;
    } catch (const Error& e) {
      std::fprintf(stderr, "  reconstruct failed (N=%d L=%d R=%d): %s\n", in.cfg.N, in.cfg.L,
                   in.cfg.R, e.what());
    }
  }
  v.pass = insts.size() >= 200 && ok == static_cast<int>(insts.size());
  v.detail = fmt("%d/%zu instances, worst distance/||x|| %.2e", ok, insts.size(), worst);
  return v;
}

Verdict magnitude_formula(const std::vector<st::Instance>& insts, gen::Rng& rng) {
  // The sweep instances plus families with any supporting length, which
  // Lemma 1 allows.
  std::vector<st::Instance> all = insts;
  for (int N : {4, 8, 12, 16}) {
    for (int L : st::divisors(N)) {
      for (int R : {L, L + 1, L + 2}) {
        std::uniform_int_distribution<int> len(1, N), anc(0, N - 1);
        for (int attempt = 0; attempt < 200; ++attempt) {
          WindowFamily W;
          for (int r = 0; r < R; ++r) W.push_back(gen::random_support(N, len(rng), rng, anc(rng)));
          if (!modulation_matrices(W, L).certified) continue;
          all.push_back({ProblemConfig{N, L, R}, W, gen::random_signal(N, rng)});
          break;
        }
      }
    }
  }
  double worst_truth = 0.0, worst_paths = 0.0;
  for (const auto& in : all) {
    const auto agg = aggregate(measure(in.x, in.W, in.cfg.L), in.W, in.cfg);
    const auto mats = certify_rank(in.W, in.cfg.L);
    const auto beta = beta_coefficients(in.W);
    const auto ls = recover_magnitudes(agg, mats, beta, in.cfg);
    const auto ne = recover_magnitudes(agg, mats, beta, in.cfg, MagnitudeSolver::normal_equations);
    worst_truth = std::max(worst_truth, st::max_rel_diff(ls.magnitudes_sq, st::squared_magnitudes(in.x)));
    worst_paths = std::max(worst_paths, st::max_rel_diff(ne.magnitudes_sq, ls.magnitudes_sq));
  }
  return {worst_truth <= 1e-9 && worst_paths <= 1e-9,
          fmt("%zu instances, worst vs |x|^2 %.2e, least squares vs normal equations %.2e",
              all.size(), worst_truth, worst_paths)};
}

Verdict necessary_condition(gen::Rng& rng) {
  double worst = 0.0;
  bool disconnected = true;
  int families = 0;
  for (int N : {4, 8, 12, 16}) {
    for (int L : st::divisors(N)) {
      const ProblemConfig cfg{N, L, 3};
      const auto W = st::random_short_windows(N, 3, rng);
      const auto x0 = gen::two_spike(N);
      const auto g = build_graph_G(x0, W, cfg);
      disconnected = disconnected && !is_connected(g);
      const auto base = measure(x0, W, L);
      for (int t = 0; t < 8; ++t) {
        const double theta = 0.05 + t / 8.0;
        const auto grid = measure(counterexample_family(x0, g, {0}, theta), W, L);
        for (std::size_t i = 0; i < grid.values.size(); ++i) {
          worst = std::max(worst, std::abs(grid.values[i] - base.values[i]));
        }
      }
      ++families;
    }
  }
  // Exhaustive check on N = 4.
  const ProblemConfig cfg4{4, 1, 2};
  const WindowFamily W4{Window{1.0, 2.0, 0.0, 0.0}, Window{0.0, 1.0, Complex{0.0, 1.0}, 0.0}};
  const auto found = oracle::exhaustive_ambiguity_search(measure(gen::two_spike(4), W4, 1), W4,
                                                         cfg4, 8, {0.0, 1.0});
  double max_pair = 0.0;
  for (const auto& a : found) {
    for (const auto& b : found) max_pair = std::max(max_pair, phase_distance(a, b).distance);
  }
  return {disconnected && worst <= 1e-12 && max_pair > 0.1,
          fmt("%d families x 8 theta, max grid deviation %.2e; N=4 search: %zu matches, "
              "largest pairwise distance %.3f",
              families, worst, found.size(), max_pair)};
}

Verdict coprimality() {
  int cases = 0, agree = 0;
  for (int N : {6, 8, 9, 12}) {
    for (int l = 2; l <= N / 2; ++l) {
      const ProblemConfig cfg{N, 1, 1};
      SupportSet all(N);
      std::iota(all.begin(), all.end(), 0);
      const auto g = build_graph_Gtilde(all, {gen::rectangular(N, l)}, cfg);
      ++cases;
      if (is_connected(g) == (std::gcd(l - 1, N) == 1)) ++agree;
    }
  }
  return {agree == cases, fmt("%d/%d (N, l) cases agree", agree, cases)};
}

struct NoisyStats {
  int trials = 0;
  int bounds_ok = 0;
  int inequalities_ok = 0;
  int edges_checked = 0;
  double worst_mag_ratio = 0.0;
  double worst_phase_ratio = 0.0;
};

NoisyStats theorem3(gen::Rng& rng) {
  NoisyStats s;
  const std::vector<std::pair<int, int>> shapes{{4, 1},  {4, 2},  {8, 1},  {8, 2},
                                                {8, 4},  {12, 1}, {12, 2}, {12, 3},
                                                {16, 2}, {16, 4}};
  for (int trial = 0; trial < 120; ++trial) {
    const auto [N, L] = shapes[trial % shapes.size()];
    const auto inst = st::try_certified_instance(N, L, L + trial % 3, rng);
    if (!inst) continue;
    const auto mats = certify_rank(inst->W, L);
    const auto c = stability_constants(inst->W, mats, inst->cfg);
    const double min_sq = min_support_magnitude_sq(inst->x, inst->cfg);
    const double level = 0.5 * error_budget(c, 0.0, min_sq).admissible_level;
    const auto clean = measure(inst->x, inst->W, L);
    const auto noisy = corrupt(clean, gen::uniform_noise(clean.values.size(), level, rng));
    const auto b = error_budget(c, noisy.noise_level, min_sq);
    ++s.trials;
    ReconstructOptions opt;
    opt.min_magnitude = std::sqrt(min_sq);
    try {
      const auto res = reconstruct(noisy, inst->W, inst->cfg, opt);
      const auto V = support(inst->x, inst->cfg);
      double mag_err = 0.0;
      for (int n = 0; n < N; ++n) {
        mag_err = std::max(mag_err, std::abs(res.magnitudes_sq[n] - std::norm(inst->x[n])));
      }
      const double ph_err = support_phase_error(res.estimate, inst->x, V);
      s.worst_mag_ratio = std::max(s.worst_mag_ratio, mag_err / b.magnitude_bound);
      if (b.phase_bound > 0.0) s.worst_phase_ratio = std::max(s.worst_phase_ratio, ph_err / b.phase_bound);
      if (b.admissible && res.support == V && mag_err <= b.magnitude_bound &&
          ph_err <= b.phase_bound) {
        ++s.bounds_ok;
      }
      // |c_eps - c| <= N |eps| and |c| >= ||W||_* min|x|^2 / N on every used edge.
      const auto agg_clean = aggregate(clean, inst->W, inst->cfg);
      const auto agg_noisy = aggregate(noisy, inst->W, inst->cfg);
      bool ineq = true;
      for (const auto& u : res.diagnostics.used_witnesses) {
        const Complex cc = agg_clean.c(u.witness.r, u.witness.m);
        const Complex cn = agg_noisy.c(u.witness.r, u.witness.m);
        ineq = ineq && std::abs(cn - cc) <= N * noisy.noise_level * (1.0 + 1e-12);
        ineq = ineq && std::abs(cc) >= c.W_star * min_sq / N * (1.0 - 1e-12);
        ++s.edges_checked;
      }
      if (ineq) ++s.inequalities_ok;
    } catch (const Error& e) {
      std::fprintf(stderr, "  noisy reconstruct failed (N=%d L=%d): %s\n", N, L, e.what());
    }
  }
  return s;
}

Verdict support_thresholding(gen::Rng& rng) {
  int ok = 0, trials = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int N = std::vector<int>{4, 8, 12, 16}[trial % 4];
    const auto divs = st::divisors(N);
    const int L = divs[trial % divs.size()];
    const int R = L + trial % 3;
    std::optional<WindowFamily> W;
    for (int attempt = 0; attempt < 2000 && !W; ++attempt) {
      auto cand = st::random_short_windows(N, R, rng);
      if (modulation_matrices(cand, L).certified) W = std::move(cand);
    }
    if (!W) continue;
    SupportSet V;
    std::bernoulli_distribution keep(0.6);
    for (int n = 0; n < N; ++n) {
      if (keep(rng)) V.push_back(n);
    }
    if (V.empty()) V.push_back(trial % N);
    const auto x = gen::random_signal(N, rng, V);
    const ProblemConfig cfg{N, L, R};
    const auto mats = certify_rank(*W, L);
    const auto c = stability_constants(*W, mats, cfg);
    const double min_sq = min_support_magnitude_sq(x, cfg);
    const double level = error_budget(c, 0.0, min_sq).admissible_level;  // at the limit
    const auto clean = measure(x, *W, L);
    const auto noisy = corrupt(clean, gen::uniform_noise(clean.values.size(), level, rng));
    const auto mags = recover_magnitudes(aggregate(noisy, *W, cfg), mats, beta_coefficients(*W), cfg);
    Signal amplitude(N);
    for (int n = 0; n < N; ++n) amplitude[n] = std::sqrt(mags.magnitudes_sq[n]);
    const auto t = threshold_support(amplitude, std::sqrt(min_sq));
    ++trials;
    if (support(t.signal, cfg) == V) ++ok;
  }
  return {trials == 100 && ok == 100, fmt("%d/%d trials recover V(x) exactly", ok, trials)};
}

Verdict compressed(const std::vector<st::Instance>& insts) {
  double worst = 0.0;
  bool counts = true;
  int done = 0;
  for (const auto& in : insts) {
    const auto grid = measure(in.x, in.W, in.cfg.L);
    const auto full = reconstruct(grid, in.W, in.cfg);
    const auto data = compress(aggregate(grid, in.W, in.cfg));
    const auto comp = reconstruct_compressed(data, in.W, in.cfg);
    const std::size_t expected = 2 * in.cfg.N * in.cfg.R / in.cfg.L;
    counts = counts && data.real_count() == expected &&
             comp.diagnostics.measurements_consumed == expected;
    for (int n = 0; n < in.cfg.N; ++n) {
      worst = std::max(worst, std::abs(comp.estimate[n] - full.estimate[n]));
    }
    ++done;
  }
  return {counts && worst <= 1e-10,
          fmt("%d instances, reals consumed = 2NR/L: %s, max |difference| %.2e", done,
              counts ? "yes" : "no", worst)};
}

Verdict oracle_equivalence(gen::Rng& rng) {
  double worst = 0.0;
  int ok = 0;
  std::uniform_int_distribution<int> pickN(2, 16);
  for (int t = 0; t < 100; ++t) {
    const int N = pickN(rng);
    const auto divs = st::divisors(N);
    const int L = divs[std::uniform_int_distribution<std::size_t>(0, divs.size() - 1)(rng)];
    const auto x = gen::random_signal(N, rng);
    const auto w = gen::random_support(N, std::uniform_int_distribution<int>(1, N)(rng), rng,
                                       std::uniform_int_distribution<int>(0, N - 1)(rng));
    const auto rep = oracle::compare("stft", stft_forward(x, w, L).values,
                                     oracle::dft_stft_direct(x, w, L).values, 1e-10);
    worst = std::max(worst, rep.rel_error);
    if (rep.pass) ++ok;
  }
  return {ok == 100, fmt("%d/100 instances, worst relative error %.2e", ok, worst)};
}

Verdict rank_gate(gen::Rng& rng) {
  int rejected = 0, certified = 0, cases = 0;
  for (int N : {4, 8, 12, 16}) {
    ++cases;
    const auto w = gen::random_support(N, N / 2, rng, 1);
    try {
      certify_rank({w, w}, 2);
    } catch (const CertificationError& e) {
      std::vector<int> all(N / 2);
      std::iota(all.begin(), all.end(), 0);
      if (e.failing_m() == all) ++rejected;
    }
    for (int attempt = 0; attempt < 100; ++attempt) {
      const auto W = st::random_short_windows(N, 2, rng);
      if (modulation_matrices(W, 2).certified) {
        certify_rank(W, 2);
        ++certified;
        break;
      }
    }
  }
  return {rejected == cases && certified == cases,
          fmt("duplicated R=L=2 families rejected with every m listed: %d/%d; "
              "full-rank families certified: %d",
              rejected, cases, certified)};
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  int failures = 0;
  auto report = [&](int id, const char* name, const Verdict& v) {
    std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  };

  const auto insts = sweep_instances(20240601, 4);
  gen::Rng rng(99);

  const auto t0 = std::chrono::steady_clock::now();
  auto v1 = exact_recovery(insts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v1.detail += fmt(", %.2f s", secs);
  v1.pass = v1.pass && secs < 10.0;
  report(1, "exact recovery", v1);
  report(2, "magnitude formula", magnitude_formula(insts, rng));
  report(3, "necessary condition", necessary_condition(rng));
  report(4, "coprimality", coprimality());

  const auto s = theorem3(rng);
  report(5, "noise bounds",
         {s.trials >= 100 && s.bounds_ok == s.trials && s.inequalities_ok == s.trials,
          fmt("%d/%d trials within both bounds", s.bounds_ok, s.trials) +
              fmt(", edge inequalities hold in %d/%d trials (%d edges)", s.inequalities_ok,
                  s.trials, s.edges_checked) +
              fmt(", worst error/bound: magnitude %.2e, phase %.2e", s.worst_mag_ratio,
                  s.worst_phase_ratio)});
  report(6, "support thresholding", support_thresholding(rng));
  report(7, "compressed measurements", compressed(insts));
  report(8, "oracle equivalence", oracle_equivalence(rng));
  report(9, "rank gate", rank_gate(rng));

  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 9 criteria failed (%.2f s)\n", failures, total);
  return failures == 0 ? 0 : 1;
}
