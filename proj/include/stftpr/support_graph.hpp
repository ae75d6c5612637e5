#pragma once

#include <algorithm>
#include <compare>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "stftpr/model.hpp"
#include "stftpr/window.hpp"

namespace stftpr {

enum class GraphVariant { G, Gtilde };

inline const char* to_string(GraphVariant v) {
  return v == GraphVariant::G ? "G" : "Gtilde";
}

/// A (window, hop) pair (r, m) that certifies an edge.
struct Witness {
  int r = 0;
  int m = 0;
  auto operator<=>(const Witness&) const = default;
};

/// Undirected edge with n < n2 and every witness that produces it, sorted
/// lexicographically by (r, m).
struct SupportGraphEdge {
  int n = 0;
  int n2 = 0;
  std::vector<Witness> witnesses;

  int other(int v) const { return v == n ? n2 : n; }
};

struct SupportGraph {
  GraphVariant variant = GraphVariant::G;
  int N = 0;
  SupportSet vertices;
  std::vector<SupportGraphEdge> edges;  // sorted by (n, n2)

  const SupportGraphEdge* find_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(
        edges.begin(), edges.end(), std::pair{a, b},
        [](const SupportGraphEdge& e, const std::pair<int, int>& key) {
          return std::pair{e.n, e.n2} < key;
        });
    if (it != edges.end() && it->n == a && it->n2 == b) return &*it;
    return nullptr;
  }

  /// Edge indices incident to each vertex id in [0, N), neighbours ascending.
  std::vector<std::vector<std::size_t>> incidence() const {
    std::vector<std::vector<std::size_t>> inc(N);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      inc[edges[i].n].push_back(i);
      inc[edges[i].n2].push_back(i);
    }
    for (int v = 0; v < N; ++v) {
      std::sort(inc[v].begin(), inc[v].end(), [&](std::size_t a, std::size_t b) {
        return edges[a].other(v) < edges[b].other(v);
      });
    }
    return inc;
  }
};

namespace detail {

using EdgeMap = std::map<std::pair<int, int>, std::vector<Witness>>;

inline void add_witness(EdgeMap& map, int a, int b, Witness w) {
  if (a > b) std::swap(a, b);
  map[{a, b}].push_back(w);
}

inline SupportGraph finish_graph(GraphVariant variant, int N, SupportSet vertices,
                                 EdgeMap& map) {
  SupportGraph g;
  g.variant = variant;
  g.N = N;
  g.vertices = std::move(vertices);
  std::sort(g.vertices.begin(), g.vertices.end());
  g.vertices.erase(std::unique(g.vertices.begin(), g.vertices.end()), g.vertices.end());
  g.edges.reserve(map.size());
  for (auto& [key, wit] : map) {
    std::sort(wit.begin(), wit.end());
    wit.erase(std::unique(wit.begin(), wit.end()), wit.end());
    g.edges.push_back({key.first, key.second, std::move(wit)});
  }
  return g;
}

inline std::vector<bool> membership(const SupportSet& V, int N) {
  std::vector<bool> in(N, false);
  for (int v : V) {
    if (v < 0 || v >= N) throw DimensionError("support index out of range");
    in[v] = true;
  }
  return in;
}

}  // namespace detail

/// G(x, W, L): n ~ n' whenever w_r(Lm - n) w_r(Lm - n') != 0 for some (r, m).
inline SupportGraph build_graph_G(const SupportSet& V, const WindowFamily& W,
                                  const ProblemConfig& cfg) {
  cfg.validate();
  validate_family(W, cfg.N);
  const int N = cfg.N;
  detail::membership(V, N);
  const auto masks = window_masks(W, cfg.zero_tol);
  detail::EdgeMap map;
  std::vector<int> seen;
  for (int r = 0; r < static_cast<int>(W.size()); ++r) {
    for (int m = 0; m < cfg.hops(); ++m) {
      seen.clear();
      for (int n : V) {
        if (masks[r][wrap_index(static_cast<long long>(cfg.L) * m - n, N)]) {
          seen.push_back(n);
        }
      }
      for (std::size_t i = 0; i < seen.size(); ++i) {
        for (std::size_t j = i + 1; j < seen.size(); ++j) {
          detail::add_witness(map, seen[i], seen[j], {r, m});
        }
      }
    }
  }
  return detail::finish_graph(GraphVariant::G, N, V, map);
}

inline SupportGraph build_graph_G(const Signal& x, const WindowFamily& W,
                                  const ProblemConfig& cfg) {
  return build_graph_G(support(x, cfg), W, cfg);
}

/// G~(x, W, L): n ~ n' whenever {n, n'} = {Lm - a(w_r), Lm - a(w_r) - l(w_r) + 1}
/// mod N for some (r, m). Windows of supporting length 1 add nothing.
inline SupportGraph build_graph_Gtilde(const SupportSet& V, const WindowFamily& W,
                                       const ProblemConfig& cfg) {
  cfg.validate();
  validate_family(W, cfg.N);
  const int N = cfg.N;
  const auto in = detail::membership(V, N);
  const auto supports = window_supports(W, cfg);
  detail::EdgeMap map;
  for (int r = 0; r < static_cast<int>(W.size()); ++r) {
    const auto [l, a] = supports[r];
    if (l < 2) continue;
    for (int m = 0; m < cfg.hops(); ++m) {
      const long long head = static_cast<long long>(cfg.L) * m - a;
      const int n1 = wrap_index(head, N);
      const int n2 = wrap_index(head - l + 1, N);
      if (n1 != n2 && in[n1] && in[n2]) detail::add_witness(map, n1, n2, {r, m});
    }
  }
  return detail::finish_graph(GraphVariant::Gtilde, N, V, map);
}

inline SupportGraph build_graph_Gtilde(const Signal& x, const WindowFamily& W,
                                       const ProblemConfig& cfg) {
  return build_graph_Gtilde(support(x, cfg), W, cfg);
}

/// Connected components as sorted vertex lists, ordered by smallest vertex.
inline std::vector<std::vector<int>> components(const SupportGraph& g) {
  const auto inc = g.incidence();
  std::vector<bool> visited(g.N, false);
  std::vector<std::vector<int>> out;
  for (int start : g.vertices) {
    if (visited[start]) continue;
    std::vector<int> comp;
    std::queue<int> frontier;
    frontier.push(start);
    visited[start] = true;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      comp.push_back(v);
      for (std::size_t e : inc[v]) {
        const int u = g.edges[e].other(v);
        if (!visited[u]) {
          visited[u] = true;
          frontier.push(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Empty and single-vertex graphs are connected.
inline bool is_connected(const SupportGraph& g) { return components(g).size() <= 1; }

struct TreeEdge {
  int parent = 0;
  int child = 0;
  SupportGraphEdge edge;
  Witness witness;
  int depth = 0;  // depth of the child
};

using WitnessSelector = std::function<Witness(const SupportGraphEdge&)>;

/// BFS tree rooted at the smallest vertex, children visited in ascending
/// order. Without a selector each tree edge keeps its first witness.
/// Throws NonRetrievableError (with the components) when g is disconnected.
inline std::vector<TreeEdge> spanning_tree(const SupportGraph& g,
                                           const WitnessSelector& select = {}) {
  auto comps = components(g);
  if (comps.size() > 1) {
    const std::string what = "support graph " + std::string(to_string(g.variant)) +
                             " is disconnected (" + std::to_string(comps.size()) +
                             " components)";
    throw NonRetrievableError(what, std::move(comps));
  }
  std::vector<TreeEdge> tree;
  if (g.vertices.empty()) return tree;
  const auto inc = g.incidence();
  std::vector<int> depth(g.N, -1);
  std::queue<int> frontier;
  frontier.push(g.vertices.front());
  depth[g.vertices.front()] = 0;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (std::size_t e : inc[v]) {
      const auto& edge = g.edges[e];
      const int u = edge.other(v);
      if (depth[u] >= 0) continue;
      depth[u] = depth[v] + 1;
      const Witness w = select ? select(edge) : edge.witnesses.front();
      tree.push_back({v, u, edge, w, depth[u]});
      frontier.push(u);
    }
  }
  return tree;
}

/// x_theta = e^{-2 pi i theta} x_{V1} + (x - x_{V1}). When V1 is a union of
/// components of G(x, W, L) its measurements do not depend on theta.
inline Signal counterexample_family(const Signal& x, const SupportGraph& g,
                                    const SupportSet& component, double theta) {
  if (static_cast<int>(x.size()) != g.N) {
    throw DimensionError("signal length does not match the graph");
  }
  if (component.empty()) throw InvalidPartitionError("component is empty");
  std::vector<bool> in_v1(g.N, false);
  std::vector<bool> in_v(g.N, false);
  for (int v : g.vertices) in_v[v] = true;
  for (int v : component) {
    if (v < 0 || v >= g.N || !in_v[v]) {
      throw InvalidPartitionError("component vertex " + std::to_string(v) +
                                  " is not in the support");
    }
    in_v1[v] = true;
  }
  if (std::count(in_v1.begin(), in_v1.end(), true) ==
      static_cast<long>(g.vertices.size())) {
    throw InvalidPartitionError("component covers the whole support");
  }
  for (const auto& e : g.edges) {
    if (in_v1[e.n] != in_v1[e.n2]) {
      throw InvalidPartitionError("edge (" + std::to_string(e.n) + ", " +
                                  std::to_string(e.n2) +
                                  ") crosses the partition");
    }
  }
  const Complex rot = std::polar(1.0, -2.0 * std::numbers::pi * theta);
  Signal out = x;
  for (int n = 0; n < g.N; ++n) {
    if (in_v1[n]) out[n] *= rot;
  }
  return out;
}

}  // namespace stftpr
