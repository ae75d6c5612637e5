#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "stftpr/model.hpp"
#include "stftpr/oracle.hpp"
#include "stftpr/phase.hpp"
#include "stftpr/robustness.hpp"
#include "stftpr/spectral.hpp"
#include "stftpr/stft.hpp"
#include "stftpr/support_graph.hpp"

namespace stftpr::io {

using nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- complex vectors: [[re, im], ...] --------------------------------------

inline json to_json(const std::vector<Complex>& v) {
  json arr = json::array();
  for (const auto& z : v) arr.push_back({z.real(), z.imag()});
  return arr;
}

inline std::vector<Complex> complex_vector_from_json(const json& j) {
  if (!j.is_array()) throw IoError("expected an array of [re, im] pairs");
  std::vector<Complex> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw IoError("expected a two-element [re, im] array");
    }
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline Signal read_signal(const std::filesystem::path& path) {
  return complex_vector_from_json(read_json(path));
}

inline void write_signal(const std::filesystem::path& path, const Signal& x) {
  write_json(path, to_json(x));
}

/// Window files hold an array of windows, each in the signal format.
inline WindowFamily read_windows(const std::filesystem::path& path) {
  const json j = read_json(path);
  if (!j.is_array()) throw IoError(path.string() + ": expected an array of windows");
  WindowFamily W;
  for (const auto& w : j) W.push_back(complex_vector_from_json(w));
  return W;
}

inline void write_windows(const std::filesystem::path& path, const WindowFamily& W) {
  json arr = json::array();
  for (const auto& w : W) arr.push_back(to_json(w));
  write_json(path, arr);
}

// ---- measurement grids: CSV + sibling metadata -----------------------------

struct GridMetadata {
  int N = 0;
  int L = 0;
  int R = 0;
  double noise_level = 0.0;
  std::optional<std::uint64_t> seed;
};

/// measurements.csv -> measurements.meta.json
inline std::filesystem::path metadata_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string grid_to_csv(const MeasurementGrid& grid) {
  std::string out = "r,m,k,value\n";
  for (int r = 0; r < grid.R; ++r) {
    for (int m = 0; m < grid.hops; ++m) {
      for (int k = 0; k < grid.N; ++k) {
        out += std::to_string(r) + ',' + std::to_string(m) + ',' + std::to_string(k) + ',' +
               format_double(grid(r, m, k)) + '\n';
      }
    }
  }
  return out;
}

inline json metadata_to_json(const GridMetadata& meta) {
  json j = {{"N", meta.N}, {"L", meta.L}, {"R", meta.R}, {"noise_level", meta.noise_level}};
  if (meta.seed) j["seed"] = *meta.seed;
  return j;
}

inline void write_grid(const std::filesystem::path& csv, const MeasurementGrid& grid,
                       std::optional<std::uint64_t> seed = {}) {
  write_text(csv, grid_to_csv(grid));
  write_json(metadata_path(csv),
             metadata_to_json({grid.N, grid.hop(), grid.R, grid.noise_level, seed}));
}

inline GridMetadata read_grid_metadata(const std::filesystem::path& csv) {
  const json j = read_json(metadata_path(csv));
  GridMetadata meta;
  try {
    meta.N = j.at("N").get<int>();
    meta.L = j.at("L").get<int>();
    meta.R = j.at("R").get<int>();
    meta.noise_level = j.at("noise_level").get<double>();
    if (j.contains("seed")) meta.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw IoError(metadata_path(csv).string() + ": " + e.what());
  }
  return meta;
}

/// Parses the CSV and checks that rows are complete and sorted by (r, m, k).
inline MeasurementGrid read_grid(const std::filesystem::path& csv) {
  const auto meta = read_grid_metadata(csv);
  if (meta.N <= 0 || meta.L <= 0 || meta.R <= 0 || meta.N % meta.L != 0) {
    throw IoError(metadata_path(csv).string() + ": invalid shape");
  }
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open " + csv.string());
  std::string line;
  if (!std::getline(in, line) || line != "r,m,k,value") {
    throw IoError(csv.string() + ": missing header r,m,k,value");
  }
  MeasurementGrid grid(meta.R, meta.N / meta.L, meta.N);
  grid.noise_level = meta.noise_level;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int idx[3];
    double value = 0.0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int f = 0; f < 3; ++f) {
      auto res = std::from_chars(p, end, idx[f]);
      if (res.ec != std::errc{} || res.ptr == end || *res.ptr != ',') {
        throw IoError(csv.string() + ": malformed row " + std::to_string(row + 2));
      }
      p = res.ptr + 1;
    }
    auto res = std::from_chars(p, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
      throw IoError(csv.string() + ": malformed value in row " + std::to_string(row + 2));
    }
    if (row >= grid.values.size() || idx[0] < 0 || idx[0] >= grid.R || idx[1] < 0 ||
        idx[1] >= grid.hops || idx[2] < 0 || idx[2] >= grid.N ||
        grid.index(idx[0], idx[1], idx[2]) != row) {
      throw IoError(csv.string() + ": rows must be sorted by (r, m, k) and match the shape");
    }
    grid.values[row++] = value;
  }
  if (row != grid.values.size()) {
    throw IoError(csv.string() + ": expected " + std::to_string(grid.values.size()) +
                  " rows, found " + std::to_string(row));
  }
  return grid;
}

// ---- reports ---------------------------------------------------------------

inline json certificate_json(const SupportGraph& g) {
  json edges = json::array();
  for (const auto& e : g.edges) {
    json wit = json::array();
    for (const auto& w : e.witnesses) wit.push_back({w.r, w.m});
    edges.push_back({{"n", e.n}, {"n2", e.n2}, {"witnesses", wit}});
  }
  const auto comps = components(g);
  return {{"variant", to_string(g.variant)},
          {"vertices", g.vertices},
          {"edges", edges},
          {"connected", comps.size() <= 1},
          {"components", comps}};
}

inline json certification_json(const ModulationMatrices& mats) {
  json j = {{"per_m_rank", mats.ranks},
            {"singular_value_min", mats.singular_value_min},
            {"certified", mats.certified},
            {"failing_m", mats.failing_m},
            {"rank_tol", mats.tol}};
  if (mats.hop_one_energy_min) j["hop_one_energy_min"] = *mats.hop_one_energy_min;
  if (mats.mask_matrix_rank) j["mask_matrix_rank"] = *mats.mask_matrix_rank;
  return j;
}

inline json stability_json(const StabilityConstants& c, const ErrorBudget& b) {
  return {{"W_norm2", c.W_norm2},
          {"W_star", c.W_star},
          {"A_norm1", c.A_norm1},
          {"noise_level", b.noise_level},
          {"admissible", b.admissible},
          {"admissible_level", b.admissible_level},
          {"magnitude_bound", b.magnitude_bound},
          {"phase_bound", b.phase_bound},
          {"min_support_magnitude_sq", b.min_support_magnitude_sq}};
}

inline json stability_json(const StabilityConstants& c) {
  return {{"W_norm2", c.W_norm2}, {"W_star", c.W_star}, {"A_norm1", c.A_norm1}};
}

inline json reconstruction_json(const ReconstructionResult& res,
                                 const std::optional<json>& stability = {}) {
  const auto& d = res.diagnostics;
  json used = json::array();
  for (const auto& u : d.used_witnesses) {
    used.push_back({{"n1", u.n1}, {"n2", u.n2}, {"r", u.witness.r}, {"m", u.witness.m},
                    {"strength", u.strength}});
  }
  json j = {{"estimate", to_json(res.estimate)},
            {"support", res.support},
            {"root_vertex", res.root_vertex},
            {"connected", res.connected},
            {"diagnostics",
             {{"noise_level", d.noise_level},
              {"clamped_mass", d.clamped_mass},
              {"imaginary_residue", d.imaginary_residue},
              {"severe_clamping", d.severe_clamping},
              {"min_evidence", d.min_evidence},
              {"tree_depth", d.tree_depth},
              {"used_witnesses", used},
              {"cycle_residuals", d.cycle_residuals},
              {"support_rule", d.support_rule},
              {"support_floor", d.support_floor},
              {"measurements_consumed", d.measurements_consumed},
              {"support_hint_mismatch", d.support_hint_mismatch}}}};
  j["stability"] = stability ? *stability : json(nullptr);
  return j;
}

inline json oracle_report_json(const oracle::OracleReport& rep) {
  return {{"case_id", rep.case_id},     {"fast_value", rep.fast_value},
          {"oracle_value", rep.oracle_value}, {"abs_error", rep.abs_error},
          {"rel_error", rep.rel_error},   {"tolerance", rep.tolerance},
          {"pass", rep.pass}};
}

}  // namespace stftpr::io
