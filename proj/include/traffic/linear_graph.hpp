#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "set_partition.hpp"

namespace traffic {

struct Edge {
  std::size_t source;
  std::size_t target;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Directed multigraph whose edge order is part of its identity.
class LinearGraph {
 public:
  LinearGraph() = default;
  LinearGraph(std::size_t vertex_count, std::vector<Edge> edges) : n_(vertex_count), edges_(std::move(edges)) {
    for (std::size_t k = 0; k < edges_.size(); ++k)
      if (edges_[k].source >= n_ || edges_[k].target >= n_)
        throw InvalidArgument("edge " + std::to_string(k + 1) + " has an endpoint outside 1.." + std::to_string(n_));
  }

  std::size_t vertex_count() const { return n_; }
  std::size_t order() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t k) const { return edges_[k]; }

  // Connected-component label of every vertex, numbered by smallest vertex.
  std::vector<std::size_t> component_labels() const {
    std::vector<std::size_t> parent(n_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (auto& e : edges_) parent[find(e.source)] = find(e.target);
    std::vector<std::size_t> lab(n_), id(n_, n_);
    std::size_t next = 0;
    for (std::size_t v = 0; v < n_; ++v) {
      auto r = find(v);
      if (id[r] == n_) id[r] = next++;
      lab[v] = id[r];
    }
    return lab;
  }
  std::size_t component_count() const {
    auto lab = component_labels();
    std::size_t c = 0;
    for (auto l : lab) c = std::max(c, l + 1);
    return c;
  }
  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(n_, 0);
    for (auto& e : edges_) {
      ++d[e.source];
      ++d[e.target];
    }
    return d;
  }
  std::size_t isolated_count() const {
    std::size_t c = 0;
    for (auto d : degrees()) c += d == 0;
    return c;
  }

  friend bool operator==(const LinearGraph&, const LinearGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

// T0 of order K: edge k runs from K+k to k.
inline LinearGraph minimal_graph(std::size_t K) {
  if (K == 0) throw InvalidArgument("minimal_graph: order K must be >= 1");
  std::vector<Edge> e;
  for (std::size_t k = 0; k < K; ++k) e.push_back({K + k, k});
  return LinearGraph(2 * K, e);
}

// One vertex carrying K loops.
inline LinearGraph loop_graph(std::size_t K) {
  if (K == 0) throw InvalidArgument("loop_graph: order K must be >= 1");
  return LinearGraph(1, std::vector<Edge>(K, Edge{0, 0}));
}

// Directed n-cycle; edge k runs from k+1 to k (mod n).
inline LinearGraph cycle_graph(std::size_t n) {
  if (n == 0) throw InvalidArgument("cycle_graph: length must be >= 1");
  std::vector<Edge> e;
  for (std::size_t k = 0; k < n; ++k) e.push_back({(k + 1) % n, k});
  return LinearGraph(n, e);
}

// Directed path v_n -> ... -> v_0; edge k runs from k+1 to k.
inline LinearGraph path_graph(std::size_t n_edges) {
  std::vector<Edge> e;
  for (std::size_t k = 0; k < n_edges; ++k) e.push_back({k + 1, k});
  return LinearGraph(n_edges + 1, e);
}

inline LinearGraph quotient(const LinearGraph& T, const SetPartition& pi) {
  if (pi.size() != T.vertex_count())
    throw InvalidArgument("quotient: partition of " + std::to_string(pi.size()) + " points for a graph with " +
                          std::to_string(T.vertex_count()) + " vertices");
  std::vector<Edge> e;
  e.reserve(T.order());
  for (auto& x : T.edges())
    e.push_back({static_cast<std::size_t>(pi.block_of(x.source)), static_cast<std::size_t>(pi.block_of(x.target))});
  return LinearGraph(pi.block_count(), e);
}

// Relabels vertices by first appearance along the edge order, sources before targets;
// untouched vertices come last.
inline std::vector<std::size_t> canonical_relabeling(const LinearGraph& T) {
  const std::size_t n = T.vertex_count();
  std::vector<std::size_t> id(n, n);
  std::size_t next = 0;
  for (auto& e : T.edges()) {
    if (id[e.source] == n) id[e.source] = next++;
    if (id[e.target] == n) id[e.target] = next++;
  }
  for (std::size_t v = 0; v < n; ++v)
    if (id[v] == n) id[v] = next++;
  return id;
}

inline LinearGraph canonical_form(const LinearGraph& T) {
  auto id = canonical_relabeling(T);
  std::vector<Edge> e;
  for (auto& x : T.edges()) e.push_back({id[x.source], id[x.target]});
  return LinearGraph(T.vertex_count(), e);
}

inline bool order_isomorphic(const LinearGraph& a, const LinearGraph& b) {
  return canonical_form(a) == canonical_form(b);
}

inline LinearGraph adjoint_graph(const LinearGraph& T) {
  std::vector<Edge> e;
  for (auto& x : T.edges()) e.push_back({x.target, x.source});
  return LinearGraph(T.vertex_count(), e);
}

inline LinearGraph disjoint_union(const LinearGraph& a, const LinearGraph& b) {
  auto e = a.edges();
  for (auto& x : b.edges()) e.push_back({x.source + a.vertex_count(), x.target + a.vertex_count()});
  return LinearGraph(a.vertex_count() + b.vertex_count(), e);
}

// Subgraph on the same vertex set keeping the listed edges in their order.
inline LinearGraph edge_subgraph(const LinearGraph& T, const std::vector<std::size_t>& keep) {
  std::vector<Edge> e;
  for (auto k : keep) e.push_back(T.edge(k));
  return LinearGraph(T.vertex_count(), e);
}

}  // namespace traffic
