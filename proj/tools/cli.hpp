#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stftpr/io.hpp"
#include "stftpr/stftpr.hpp"

namespace stftpr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kNonRetrievable = 2,
  kCertification = 3,
  kDegenerateEdge = 4,
  kVerificationFailed = 5,
};

struct RunConfig {
  int N = 0;
  int L = 1;
  int R = 1;
  std::optional<std::uint64_t> seed;
  double zero_tol = kDefaultZeroTol;
  std::optional<double> rank_tol;
  double noise = 0.0;
  std::string windows;
  std::string signal;
  std::string grid;
  std::optional<double> min_magnitude;
  bool compressed = false;
  std::string out;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline int parse_int_arg(const std::string& spec, const std::string& text) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("bad integer in '" + spec + "'");
  }
}

/// Lazily created so that file-only runs need no seed.
class SeededRng {
 public:
  explicit SeededRng(std::optional<std::uint64_t> seed) : seed_(seed) {}

  gen::Rng& get(const std::string& purpose) {
    if (!seed_) throw UsageError("--seed is required for " + purpose);
    if (!rng_) rng_.emplace(*seed_);
    return *rng_;
  }

 private:
  std::optional<std::uint64_t> seed_;
  std::optional<gen::Rng> rng_;
};

/// A window spec is a JSON file or one of rectangular:<l>,
/// random-support:<l>, masks.
inline WindowFamily resolve_windows(const RunConfig& cfg, SeededRng& rng) {
  if (cfg.windows.empty()) throw UsageError("--windows is required");
  if (fs::is_regular_file(cfg.windows)) return io::read_windows(cfg.windows);
  const auto colon = cfg.windows.find(':');
  const std::string kind = cfg.windows.substr(0, colon);
  if (kind == "masks") {
    if (cfg.N <= 0) throw UsageError("--n is required for generated windows");
    return gen::masks(cfg.N, cfg.R, rng.get("the masks generator"));
  }
  if (colon == std::string::npos) {
    throw UsageError("window file not found and not a generator: " + cfg.windows);
  }
  if (cfg.N <= 0) throw UsageError("--n is required for generated windows");
  const int l = parse_int_arg(cfg.windows, cfg.windows.substr(colon + 1));
  WindowFamily W;
  if (kind == "rectangular") {
    for (int r = 0; r < cfg.R; ++r) W.push_back(gen::rectangular(cfg.N, l));
  } else if (kind == "random-support") {
    auto& g = rng.get("the random-support generator");
    std::uniform_int_distribution<int> anchor(0, cfg.N - 1);
    for (int r = 0; r < cfg.R; ++r) {
      const int a = anchor(g);
      W.push_back(gen::random_support(cfg.N, l, g, a));
    }
  } else {
    throw UsageError("unknown window generator: " + kind);
  }
  return W;
}

/// A signal spec is a JSON file or one of random, two-spike, delta.
inline Signal resolve_signal(const RunConfig& cfg, SeededRng& rng) {
  if (cfg.signal.empty()) throw UsageError("--signal is required");
  if (fs::is_regular_file(cfg.signal)) return io::read_signal(cfg.signal);
  if (cfg.N <= 0) throw UsageError("--n is required for generated signals");
  if (cfg.signal == "random") return gen::random_signal(cfg.N, rng.get("random signals"));
  if (cfg.signal == "two-spike") return gen::two_spike(cfg.N);
  if (cfg.signal == "delta") return gen::delta(cfg.N);
  throw UsageError("signal file not found and not a named pattern: " + cfg.signal);
}

/// Reconciles N and R with what was loaded and validates the config.
inline ProblemConfig problem_config(RunConfig& cfg, const WindowFamily& W) {
  if (W.empty()) throw UsageError("window family is empty");
  const int n = static_cast<int>(W.front().size());
  if (cfg.N > 0 && cfg.N != n) {
    throw UsageError("--n " + std::to_string(cfg.N) + " does not match window length " +
                     std::to_string(n));
  }
  cfg.N = n;
  cfg.R = static_cast<int>(W.size());
  ProblemConfig pc{cfg.N, cfg.L, cfg.R, cfg.zero_tol};
  try {
    pc.validate();
    validate_family(W, pc.N);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return pc;
}

inline void emit(const RunConfig& cfg, const json& j, std::ostream& out) {
  if (cfg.out.empty()) {
    out << j.dump(2) << "\n";
  } else {
    io::write_json(cfg.out, j);
  }
}

inline json config_json(const RunConfig& cfg) {
  json j = {{"N", cfg.N},          {"L", cfg.L},
            {"R", cfg.R},          {"zero_tol", cfg.zero_tol},
            {"noise", cfg.noise},  {"windows", cfg.windows},
            {"signal", cfg.signal}};
  j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  j["rank_tol"] = cfg.rank_tol ? json(*cfg.rank_tol) : json(nullptr);
  return j;
}

}  // namespace detail

inline int cmd_simulate(RunConfig cfg, std::ostream& out) {
  if (cfg.out.empty()) throw UsageError("simulate needs --out <directory>");
  detail::SeededRng rng(cfg.seed);
  const auto W = detail::resolve_windows(cfg, rng);
  const auto pc = detail::problem_config(cfg, W);
  const auto x = detail::resolve_signal(cfg, rng);
  if (static_cast<int>(x.size()) != pc.N) throw UsageError("signal length does not match N");

  const fs::path dir = cfg.out;
  const auto grid = measure(x, W, pc.L);
  io::write_signal(dir / "signal.json", x);
  io::write_windows(dir / "windows.json", W);
  io::write_grid(dir / "measurements.csv", grid, cfg.seed);
  if (cfg.noise > 0.0) {
    const auto eps = gen::uniform_noise(grid.values.size(), cfg.noise, rng.get("noise"));
    io::write_grid(dir / "noisy_measurements.csv", corrupt(grid, eps), cfg.seed);
  }
  const auto mats = modulation_matrices(W, pc.L, cfg.rank_tol);
  io::write_json(dir / "certification.json", io::certification_json(mats));
  io::write_json(dir / "run.json", detail::config_json(cfg));
  out << "wrote " << dir.string() << "\n";
  return kOk;
}

inline int cmd_analyze(RunConfig cfg, std::ostream& out) {
  detail::SeededRng rng(cfg.seed);
  const auto W = detail::resolve_windows(cfg, rng);
  const auto pc = detail::problem_config(cfg, W);
  const auto x = detail::resolve_signal(cfg, rng);
  if (static_cast<int>(x.size()) != pc.N) throw UsageError("signal length does not match N");

  const auto g = build_graph_G(x, W, pc);
  const auto gt = build_graph_Gtilde(x, W, pc);
  const auto supports = window_supports(W, pc);
  bool lengths_ok = true;
  json lengths = json::array();
  for (const auto& s : supports) {
    lengths.push_back({{"length", s.length}, {"anchor", s.anchor}});
    lengths_ok = lengths_ok && 2 * s.length <= pc.N;
  }
  const auto mats = modulation_matrices(W, pc.L, cfg.rank_tol);
  const bool necessary = is_connected(g);
  const bool sufficient = is_connected(gt) && lengths_ok && mats.certified;
  std::string verdict = "indeterminate";
  if (!necessary) verdict = "provably-non-retrievable";
  else if (sufficient) verdict = "provably-retrievable";

  json j = {{"G", io::certificate_json(g)},
            {"Gtilde", io::certificate_json(gt)},
            {"window_supports", lengths},
            {"supporting_lengths_ok", lengths_ok},
            {"certification", io::certification_json(mats)},
            {"necessary_condition", necessary},
            {"sufficient_condition", sufficient},
            {"verdict", verdict}};
  detail::emit(cfg, j, out);
  return kOk;
}

inline std::optional<json> stability_section(const WindowFamily& W, const ProblemConfig& pc,
                                             const RunConfig& cfg, double noise,
                                             const std::optional<Signal>& reference) {
  const auto mats = modulation_matrices(W, pc.L, cfg.rank_tol);
  if (!mats.certified) return std::nullopt;
  const auto consts = stability_constants(W, mats, pc);
  if (reference) {
    return io::stability_json(consts, error_budget(consts, noise, *reference, pc));
  }
  if (cfg.min_magnitude) {
    return io::stability_json(
        consts, error_budget(consts, noise, *cfg.min_magnitude * *cfg.min_magnitude));
  }
  json j = io::stability_json(consts);
  j["noise_level"] = noise;
  return j;
}

inline int cmd_recover(RunConfig cfg, std::ostream& out) {
  if (cfg.grid.empty()) throw UsageError("recover needs --grid <measurements.csv>");
  if (cfg.windows.empty() || !fs::is_regular_file(cfg.windows)) {
    throw UsageError("recover needs an existing --windows file");
  }
  const auto W = io::read_windows(cfg.windows);
  const auto grid = io::read_grid(cfg.grid);
  const auto meta = io::read_grid_metadata(cfg.grid);
  cfg.L = meta.L;
  const auto pc = detail::problem_config(cfg, W);
  if (grid.N != pc.N || grid.R != pc.R) throw UsageError("grid shape does not match windows");

  std::optional<Signal> reference;
  if (!cfg.signal.empty()) {
    if (!fs::is_regular_file(cfg.signal)) throw UsageError("reference signal file not found");
    reference = io::read_signal(cfg.signal);
    if (static_cast<int>(reference->size()) != pc.N) {
      throw UsageError("reference signal length does not match N");
    }
  }

  ReconstructOptions opt;
  opt.rank_tol = cfg.rank_tol;
  opt.min_magnitude = cfg.min_magnitude;
  try {
    ReconstructionResult res;
    if (cfg.compressed) {
      res = reconstruct_compressed(aggregate(grid, W, pc), W, pc, std::nullopt, opt);
    } else {
      res = reconstruct(grid, W, pc, opt);
    }
    json j = io::reconstruction_json(
        res, stability_section(W, pc, cfg, grid.noise_level, reference));
    j["compressed"] = cfg.compressed;
    if (reference) {
      const auto d = phase_distance(*reference, res.estimate);
      j["phase_distance"] = {{"distance", d.distance},
                             {"aligning_phase", d.aligning_phase},
                             {"relative", d.distance / std::max(l2_norm(*reference), 1e-300)}};
    }
    detail::emit(cfg, j, out);
    return kOk;
  } catch (const NonRetrievableError& e) {
    detail::emit(cfg,
                 {{"error", "non-retrievable"}, {"message", e.what()},
                  {"connected", false}, {"components", e.components()}},
                 out);
    return kNonRetrievable;
  } catch (const CertificationError& e) {
    detail::emit(cfg, {{"error", "certification"}, {"message", e.what()},
                       {"failing_m", e.failing_m()}},
                 out);
    return kCertification;
  } catch (const DegenerateEdgeError& e) {
    detail::emit(cfg, {{"error", "degenerate-edge"}, {"message", e.what()},
                       {"edge", {e.n(), e.n2()}}},
                 out);
    return kDegenerateEdge;
  }
}

inline int cmd_bounds(RunConfig cfg, std::ostream& out) {
  detail::SeededRng rng(cfg.seed);
  const auto W = detail::resolve_windows(cfg, rng);
  const auto pc = detail::problem_config(cfg, W);
  std::optional<Signal> reference;
  if (!cfg.signal.empty()) reference = detail::resolve_signal(cfg, rng);
  if (!reference && !cfg.min_magnitude) {
    throw UsageError("bounds needs --signal or --min-magnitude");
  }
  if (reference && static_cast<int>(reference->size()) != pc.N) {
    throw UsageError("signal length does not match N");
  }
  const auto mats = modulation_matrices(W, pc.L, cfg.rank_tol);
  if (!mats.certified) {
    detail::emit(cfg, {{"error", "certification"}, {"certification", io::certification_json(mats)}},
                 out);
    return kCertification;
  }
  const auto consts = stability_constants(W, mats, pc);
  const double min_sq = reference ? min_support_magnitude_sq(*reference, pc)
                                  : *cfg.min_magnitude * *cfg.min_magnitude;
  detail::emit(cfg, io::stability_json(consts, error_budget(consts, cfg.noise, min_sq)), out);
  return kOk;
}

inline int cmd_verify(RunConfig cfg, std::ostream& out) {
  detail::SeededRng rng(cfg.seed);
  const auto W = detail::resolve_windows(cfg, rng);
  const auto pc = detail::problem_config(cfg, W);
  const auto x = detail::resolve_signal(cfg, rng);
  if (static_cast<int>(x.size()) != pc.N) throw UsageError("signal length does not match N");

  std::vector<json> lines;
  bool all_pass = true;
  auto add = [&](const oracle::OracleReport& rep) {
    all_pass = all_pass && rep.pass;
    lines.push_back(io::oracle_report_json(rep));
  };

  for (int r = 0; r < pc.R; ++r) {
    add(oracle::compare("stft_fft_vs_direct/r=" + std::to_string(r),
                        stft_forward(x, W[r], pc.L).values,
                        oracle::dft_stft_direct(x, W[r], pc.L).values, 1e-10));
  }
  const auto grid = measure(x, W, pc.L);
  const auto mats = modulation_matrices(W, pc.L, cfg.rank_tol);
  if (mats.certified) {
    const auto beta = beta_coefficients(W);
    const auto agg = aggregate(grid, W, pc);
    const auto ls = recover_magnitudes(agg, mats, beta, pc);
    const auto ne = recover_magnitudes(agg, mats, beta, pc, MagnitudeSolver::normal_equations);
    std::vector<double> truth(pc.N);
    for (int n = 0; n < pc.N; ++n) truth[n] = std::norm(x[n]);
    add(oracle::compare("magnitudes_ls_vs_normal_equations", ls.raw, ne.raw, 1e-9));
    add(oracle::compare("magnitudes_vs_direct", ls.raw, truth, 1e-9));
    try {
      ReconstructOptions opt;
      opt.rank_tol = cfg.rank_tol;
      const auto res = reconstruct(grid, W, pc, opt);
      const auto d = phase_distance(x, res.estimate);
      Signal aligned = res.estimate;
      const Complex rot = std::polar(1.0, d.aligning_phase);
      for (auto& v : aligned) v *= rot;
      add(oracle::compare("reconstruction_vs_reference", aligned, x, 1e-8));
    } catch (const Error& e) {
      all_pass = false;
      lines.push_back({{"case_id", "reconstruction_vs_reference"},
                       {"error", e.what()},
                       {"pass", false}});
    }
  } else {
    lines.push_back({{"case_id", "rank_certification"},
                     {"failing_m", mats.failing_m},
                     {"pass", false}});
    all_pass = false;
  }

  std::string text;
  for (const auto& l : lines) text += l.dump() + "\n";
  if (cfg.out.empty()) {
    out << text;
  } else {
    io::write_text(cfg.out, text);
  }
  return all_pass ? kOk : kVerificationFailed;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase retrieval from multiple-window STFT magnitudes"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.N, "signal length N");
    sub->add_option("--hop", cfg.L, "separation parameter L (must divide N)");
    sub->add_option("--r", cfg.R, "number of generated windows");
    sub->add_option("--windows", cfg.windows,
                    "window JSON file or generator: rectangular:<l> | random-support:<l> | masks");
    sub->add_option("--signal", cfg.signal, "signal JSON file or pattern: random | two-spike | delta");
    sub->add_option("--seed", cfg.seed, "seed for every random draw");
    sub->add_option("--zero-tol", cfg.zero_tol, "relative zero tolerance");
    sub->add_option("--rank-tol", cfg.rank_tol, "relative singular value cutoff");
    sub->add_option("--out", cfg.out, "output path");
  };

  auto* simulate = app.add_subcommand("simulate", "synthesize signal, windows and measurements");
  common(simulate);
  simulate->add_option("--noise", cfg.noise, "uniform noise level added to a second grid");

  auto* analyze = app.add_subcommand("analyze", "support-graph and rank certificate");
  common(analyze);

  auto* recover = app.add_subcommand("recover", "reconstruct from measurements");
  common(recover);
  recover->add_option("--grid", cfg.grid, "measurement CSV (metadata alongside)");
  recover->add_flag("--compressed", cfg.compressed, "use only Z(r,m) and arg C(r,m)");
  recover->add_option("--min-magnitude", cfg.min_magnitude, "prior min |x(n)| on the support");

  auto* bounds = app.add_subcommand("bounds", "stability constants and error budget");
  common(bounds);
  bounds->add_option("--noise", cfg.noise, "noise level |eps|");
  bounds->add_option("--min-magnitude", cfg.min_magnitude, "prior min |x(n)| on the support");

  auto* verify = app.add_subcommand("verify", "oracle cross-checks as JSON lines");
  common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsage;
  }

  try {
    if (cfg.L <= 0 || (cfg.N > 0 && cfg.N % cfg.L != 0)) {
      throw UsageError("--hop must be positive and divide --n");
    }
    if (*simulate) return cmd_simulate(cfg, out);
    if (*analyze) return cmd_analyze(cfg, out);
    if (*recover) return cmd_recover(cfg, out);
    if (*bounds) return cmd_bounds(cfg, out);
    if (*verify) return cmd_verify(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CertificationError& e) {
    err << "error: " << e.what() << "\n";
    return kCertification;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace stftpr::cli
