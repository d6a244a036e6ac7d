#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linear_graph.hpp"
#include "numeric.hpp"
#include "set_partition.hpp"

namespace traffic {

namespace detail {

struct Incidence {
  std::size_t edge;
  std::size_t other;
};

inline std::vector<std::vector<Incidence>> incidence(const LinearGraph& T) {
  std::vector<std::vector<Incidence>> adj(T.vertex_count());
  for (std::size_t k = 0; k < T.order(); ++k) {
    auto [s, t] = T.edge(k);
    if (s == t) continue;
    adj[s].push_back({k, t});
    adj[t].push_back({k, s});
  }
  return adj;
}

}  // namespace detail

// Bridges of the underlying undirected multigraph, ascending edge ids.
inline std::vector<std::size_t> cutting_edges(const LinearGraph& T) {
  const std::size_t n = T.vertex_count();
  const std::size_t none = static_cast<std::size_t>(-1);
  auto adj = detail::incidence(T);
  std::vector<std::size_t> disc(n, none), low(n, 0);
  std::vector<std::size_t> out;
  std::size_t timer = 0;
  struct Frame {
    std::size_t v, parent_edge, next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != none) continue;
    std::vector<Frame> stack{{root, none, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.v].size()) {
        auto [e, w] = adj[f.v][f.next++];
        if (e == f.parent_edge) continue;
        if (disc[w] == none) {
          disc[w] = low[w] = timer++;
          stack.push_back({w, e, 0});
        } else {
          low[f.v] = std::min(low[f.v], disc[w]);
        }
      } else {
        Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          auto& p = stack.back();
          low[p.v] = std::min(low[p.v], low[done.v]);
          if (low[done.v] > disc[p.v]) out.push_back(done.parent_edge);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ForestEdge {
  std::size_t a, b, edge;
};

// Two-edge connected components and the bridges joining them.
struct ForestOfTEC {
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> component_of;
  std::vector<ForestEdge> forest_edges;

  // An isolated forest vertex counts as two leaves.
  std::size_t leaf_count() const {
    const std::size_t m = components.size();
    std::vector<std::size_t> deg(m, 0), parent(m);
    for (std::size_t i = 0; i < m; ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (auto& f : forest_edges) {
      ++deg[f.a];
      ++deg[f.b];
      parent[find(f.a)] = find(f.b);
    }
    std::vector<std::size_t> tree_size(m, 0);
    for (std::size_t i = 0; i < m; ++i) ++tree_size[find(i)];
    std::size_t leaves = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (tree_size[find(i)] == 1) leaves += 2;
      else leaves += deg[i] == 1;
    }
    return leaves;
  }
};

inline ForestOfTEC forest_of_tec(const LinearGraph& T) {
  auto bridges = cutting_edges(T);
  std::vector<bool> is_bridge(T.order(), false);
  for (auto b : bridges) is_bridge[b] = true;
  std::vector<Edge> kept;
  for (std::size_t k = 0; k < T.order(); ++k)
    if (!is_bridge[k]) kept.push_back(T.edge(k));
  LinearGraph reduced(T.vertex_count(), kept);
  ForestOfTEC f;
  f.component_of = reduced.component_labels();
  std::size_t m = 0;
  for (auto c : f.component_of) m = std::max(m, c + 1);
  f.components.resize(m);
  for (std::size_t v = 0; v < T.vertex_count(); ++v) f.components[f.component_of[v]].push_back(v);
  for (auto b : bridges) f.forest_edges.push_back({f.component_of[T.edge(b).source], f.component_of[T.edge(b).target], b});
  return f;
}

inline std::size_t leaf_count(const LinearGraph& T) { return forest_of_tec(T).leaf_count(); }

// A biconnected block that is a cycle; edges listed in walking order.
struct CycleBlock {
  std::vector<std::size_t> edges;
  std::vector<std::size_t> vertices;
  bool directed = false;
};

struct CactusInfo {
  bool cactus = false;
  bool well_oriented = false;
  std::vector<CycleBlock> cycles;
};

namespace detail {

// Biconnected blocks as edge-id lists; loops form their own blocks.
inline std::vector<std::vector<std::size_t>> edge_blocks(const LinearGraph& T) {
  const std::size_t n = T.vertex_count();
  const std::size_t none = static_cast<std::size_t>(-1);
  auto adj = incidence(T);
  std::vector<std::size_t> disc(n, none), low(n, 0);
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::size_t> estack;
  std::vector<bool> edge_seen(T.order(), false);
  std::size_t timer = 0;
  struct Frame {
    std::size_t v, parent_edge, next;
  };
  for (std::size_t k = 0; k < T.order(); ++k)
    if (T.edge(k).source == T.edge(k).target) blocks.push_back({k});
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != none) continue;
    std::vector<Frame> stack{{root, none, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.v].size()) {
        auto [e, w] = adj[f.v][f.next++];
        if (e == f.parent_edge) continue;
        if (disc[w] == none) {
          edge_seen[e] = true;
          estack.push_back(e);
          disc[w] = low[w] = timer++;
          stack.push_back({w, e, 0});
        } else {
          if (!edge_seen[e]) {
            edge_seen[e] = true;
            estack.push_back(e);
          }
          low[f.v] = std::min(low[f.v], disc[w]);
        }
      } else {
        Frame done = f;
        stack.pop_back();
        if (stack.empty()) continue;
        auto& p = stack.back();
        low[p.v] = std::min(low[p.v], low[done.v]);
        if (low[done.v] >= disc[p.v]) {
          std::vector<std::size_t> blk;
          while (true) {
            auto e = estack.back();
            estack.pop_back();
            blk.push_back(e);
            if (e == done.parent_edge) break;
          }
          std::sort(blk.begin(), blk.end());
          blocks.push_back(blk);
        }
      }
    }
  }
  std::sort(blocks.begin(), blocks.end());
  return blocks;
}

}  // namespace detail

// Block decomposition: a forest of cacti has every block a cycle.
inline CactusInfo cactus_decomposition(const LinearGraph& T) {
  CactusInfo info;
  info.cactus = true;
  info.well_oriented = true;
  for (auto& blk : detail::edge_blocks(T)) {
    std::vector<std::size_t> verts;
    for (auto e : blk) {
      verts.push_back(T.edge(e).source);
      verts.push_back(T.edge(e).target);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    bool is_cycle = blk.size() == verts.size();
    if (is_cycle) {
      for (auto v : verts) {
        std::size_t deg = 0;
        for (auto e : blk) deg += (T.edge(e).source == v) + (T.edge(e).target == v);
        if (deg != 2) is_cycle = false;
      }
    }
    if (!is_cycle) {
      info.cactus = false;
      info.well_oriented = false;
      info.cycles.clear();
      return info;
    }
    CycleBlock c;
    c.vertices = verts;
    c.directed = true;
    for (auto v : verts) {
      std::size_t in = 0, out = 0;
      for (auto e : blk) {
        in += T.edge(e).target == v;
        out += T.edge(e).source == v;
      }
      if (in != 1 || out != 1) c.directed = false;
    }
    // Walk from the smallest edge, leaving each edge through its source.
    std::vector<bool> used(blk.size(), false);
    used[0] = true;
    c.edges.push_back(blk[0]);
    std::size_t at = T.edge(blk[0]).source;
    for (std::size_t step = 1; step < blk.size(); ++step) {
      for (std::size_t j = 0; j < blk.size(); ++j) {
        if (used[j]) continue;
        auto [s, t] = T.edge(blk[j]);
        if (s == at || t == at) {
          used[j] = true;
          c.edges.push_back(blk[j]);
          at = (t == at) ? s : t;
          break;
        }
      }
    }
    info.well_oriented = info.well_oriented && c.directed;
    info.cycles.push_back(std::move(c));
  }
  return info;
}

inline bool is_forest_of_cacti(const LinearGraph& T) { return cactus_decomposition(T).cactus; }
inline bool is_well_oriented(const LinearGraph& T) {
  auto c = cactus_decomposition(T);
  return c.cactus && c.well_oriented;
}

inline constexpr std::size_t kMaxCycleEnumerationEdges = 16;

// All simple cycles as sorted edge-id sets (undirected; loops and 2-cycles included).
inline std::vector<std::vector<std::size_t>> simple_cycles(const LinearGraph& T) {
  if (T.order() > kMaxCycleEnumerationEdges)
    throw ResourceLimit("simple cycle enumeration is limited to " + std::to_string(kMaxCycleEnumerationEdges) +
                        " edges");
  std::vector<std::vector<std::size_t>> out;
  auto adj = detail::incidence(T);
  for (std::size_t k = 0; k < T.order(); ++k)
    if (T.edge(k).source == T.edge(k).target) out.push_back({k});
  // Each cycle is found from its smallest vertex, extending through larger vertices only.
  const std::size_t n = T.vertex_count();
  std::vector<bool> on_path(n, false);
  std::vector<std::size_t> path_edges;
  std::vector<std::vector<std::size_t>> raw;
  auto dfs = [&](auto&& self, std::size_t start, std::size_t v) -> void {
    for (auto [e, w] : adj[v]) {
      if (!path_edges.empty() && e == path_edges.back()) continue;
      if (w == start && !path_edges.empty()) {
        auto cyc = path_edges;
        cyc.push_back(e);
        std::sort(cyc.begin(), cyc.end());
        raw.push_back(cyc);
        continue;
      }
      if (w < start || on_path[w]) continue;
      on_path[w] = true;
      path_edges.push_back(e);
      self(self, start, w);
      path_edges.pop_back();
      on_path[w] = false;
    }
  };
  for (std::size_t s = 0; s < n; ++s) {
    on_path[s] = true;
    dfs(dfs, s, s);
    on_path[s] = false;
  }
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  out.insert(out.end(), raw.begin(), raw.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Cactus test by cycle enumeration: no bridges, and every edge on exactly one simple cycle.
inline bool is_forest_of_cacti_by_cycles(const LinearGraph& T) {
  std::vector<std::size_t> hits(T.order(), 0);
  for (auto& c : simple_cycles(T))
    for (auto e : c) ++hits[e];
  for (auto h : hits)
    if (h != 1) return false;
  return true;
}

// Letter and star flag per edge; letters are 0-based internally.
struct EdgeLabels {
  std::vector<int> delta;
  std::vector<bool> star;
};

enum class Validity { Valid, NotCactus, NotWellOriented, NotWellColored, NotAlternated };

inline std::string to_string(Validity v) {
  switch (v) {
    case Validity::Valid: return "valid";
    case Validity::NotCactus: return "not_cactus";
    case Validity::NotWellOriented: return "not_well_oriented";
    case Validity::NotWellColored: return "not_well_colored";
    case Validity::NotAlternated: return "not_alternated";
  }
  return "unknown";
}

inline Validity validity(const LinearGraph& T, const EdgeLabels& lab, const CactusInfo& info) {
  if (lab.delta.size() != T.order() || lab.star.size() != T.order())
    throw InvalidArgument("edge labels have " + std::to_string(lab.delta.size()) + " letters and " +
                          std::to_string(lab.star.size()) + " star flags for a graph of order " +
                          std::to_string(T.order()));
  if (!info.cactus) return Validity::NotCactus;
  if (!info.well_oriented) return Validity::NotWellOriented;
  for (auto& c : info.cycles)
    for (auto e : c.edges)
      if (lab.delta[e] != lab.delta[c.edges.front()]) return Validity::NotWellColored;
  for (auto& c : info.cycles) {
    if (c.edges.size() % 2) return Validity::NotAlternated;
    for (std::size_t i = 0; i < c.edges.size(); ++i)
      if (lab.star[c.edges[i]] == lab.star[c.edges[(i + 1) % c.edges.size()]]) return Validity::NotAlternated;
  }
  return Validity::Valid;
}

inline Validity validity(const LinearGraph& T, const EdgeLabels& lab) {
  return validity(T, lab, cactus_decomposition(T));
}
inline bool is_valid(const LinearGraph& T, const EdgeLabels& lab) { return validity(T, lab) == Validity::Valid; }

// Graph of colored components: color-1 and color-2 components of T' over the full vertex set,
// one edge per vertex.
struct ColoredComponentGraph {
  struct Node {
    int color;
    std::vector<std::size_t> vertices;
    std::size_t leaves;
    bool two_edge_connected;
  };
  struct Link {
    std::size_t a, b, vertex;
  };
  std::vector<Node> nodes;
  std::vector<Link> links;

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    for (auto& l : links) {
      ++d[l.a];
      ++d[l.b];
    }
    return d;
  }
  // Sum over nodes of leaves minus degree; preserved by pruning.
  long leaf_excess() const {
    auto d = degrees();
    long s = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += static_cast<long>(nodes[i].leaves) - static_cast<long>(d[i]);
    return s;
  }
};

inline ColoredComponentGraph colored_component_graph(const LinearGraph& Tp, const std::vector<int>& color) {
  if (color.size() != Tp.order())
    throw InvalidArgument("coloring has " + std::to_string(color.size()) + " entries for a graph of order " +
                          std::to_string(Tp.order()));
  ColoredComponentGraph g;
  std::vector<std::size_t> node_of[2];
  for (int c = 1; c <= 2; ++c) {
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < Tp.order(); ++k) {
      if (color[k] != 1 && color[k] != 2) throw InvalidArgument("edge colors must be 1 or 2");
      if (color[k] == c) keep.push_back(k);
    }
    auto sub = edge_subgraph(Tp, keep);
    auto lab = sub.component_labels();
    std::size_t m = 0;
    for (auto l : lab) m = std::max(m, l + 1);
    std::size_t base = g.nodes.size();
    std::vector<std::vector<std::size_t>> members(m);
    for (std::size_t v = 0; v < Tp.vertex_count(); ++v) members[lab[v]].push_back(v);
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<std::size_t> inside;
      for (std::size_t k : keep)
        if (lab[Tp.edge(k).source] == i) inside.push_back(k);
      // Component as its own graph on its vertices.
      std::vector<std::size_t> local(Tp.vertex_count(), 0);
      for (std::size_t j = 0; j < members[i].size(); ++j) local[members[i][j]] = j;
      std::vector<Edge> es;
      for (auto k : inside) es.push_back({local[Tp.edge(k).source], local[Tp.edge(k).target]});
      LinearGraph comp(members[i].size(), es);
      g.nodes.push_back({c, members[i], leaf_count(comp), cutting_edges(comp).empty()});
    }
    node_of[c - 1].resize(Tp.vertex_count());
    for (std::size_t v = 0; v < Tp.vertex_count(); ++v) node_of[c - 1][v] = base + lab[v];
  }
  for (std::size_t v = 0; v < Tp.vertex_count(); ++v) g.links.push_back({node_of[0][v], node_of[1][v], v});
  return g;
}

// Removes, one at a time, a degree-one node without cutting edges, until none remains.
inline ColoredComponentGraph prune(const ColoredComponentGraph& g) {
  ColoredComponentGraph cur = g;
  while (true) {
    auto d = cur.degrees();
    std::size_t victim = cur.nodes.size();
    for (std::size_t i = 0; i < cur.nodes.size(); ++i)
      if (d[i] == 1 && cur.nodes[i].two_edge_connected) {
        victim = i;
        break;
      }
    if (victim == cur.nodes.size()) return cur;
    ColoredComponentGraph next;
    std::vector<std::size_t> remap(cur.nodes.size());
    for (std::size_t i = 0; i < cur.nodes.size(); ++i) {
      if (i == victim) continue;
      remap[i] = next.nodes.size();
      next.nodes.push_back(cur.nodes[i]);
    }
    for (auto& l : cur.links)
      if (l.a != victim && l.b != victim) next.links.push_back({remap[l.a], remap[l.b], l.vertex});
    cur = std::move(next);
  }
}

// eta = (L(T1) + L(T2) - L(T') - 2|V'|) / 2 with T1, T2 on the full vertex set.
inline Rational eta(const LinearGraph& Tp, const std::vector<int>& color) {
  if (color.size() != Tp.order()) throw InvalidArgument("coloring size does not match the graph order");
  std::vector<std::size_t> k1, k2;
  for (std::size_t k = 0; k < Tp.order(); ++k) (color[k] == 1 ? k1 : k2).push_back(k);
  long l1 = static_cast<long>(leaf_count(edge_subgraph(Tp, k1)));
  long l2 = static_cast<long>(leaf_count(edge_subgraph(Tp, k2)));
  long lp = static_cast<long>(leaf_count(Tp));
  long v = static_cast<long>(Tp.vertex_count());
  return Rational(l1 + l2 - lp - 2 * v, 2);
}

// Leaf count never decreases when passing to a finer partition of the vertices of T0.
inline bool leaf_monotonicity_check(const SetPartition& pi, const SetPartition& finer, std::size_t K) {
  if (pi.size() != 2 * K || finer.size() != 2 * K) throw InvalidArgument("partitions must live on 2K points");
  if (!leq(finer, pi)) throw InvalidArgument("leaf_monotonicity_check requires finer <= pi");
  auto T0 = minimal_graph(K);
  return leaf_count(quotient(T0, pi)) <= leaf_count(quotient(T0, finer));
}

}  // namespace traffic
