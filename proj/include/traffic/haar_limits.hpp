#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "graph_invariants.hpp"
#include "linear_graph.hpp"
#include "numeric.hpp"
#include "operand.hpp"
#include "parallel.hpp"
#include "set_partition.hpp"
#include "star_word.hpp"
#include "tensor_traces.hpp"

namespace traffic {

enum class BlockTag { U, T, V };

inline std::string to_string(BlockTag b) {
  switch (b) {
    case BlockTag::U: return "u";
    case BlockTag::T: return "t";
    case BlockTag::V: return "v";
  }
  return "?";
}

struct EdgeMeta {
  std::size_t base_edge;
  std::size_t position;  // 0-based position in the word
  BlockTag tag;
  int letter;
  bool star;
};

struct Linearization {
  LinearGraph graph;
  std::vector<EdgeMeta> meta;
  std::size_t K1 = 0, K2 = 0, K3 = 0, p = 0;

  EdgeLabels labels() const {
    EdgeLabels lab;
    for (auto& m : meta) {
      lab.delta.push_back(m.letter);
      lab.star.push_back(m.star);
    }
    return lab;
  }
  // 1 for U and transpose blocks, 2 for V blocks.
  std::vector<int> coloring() const {
    std::vector<int> c;
    for (auto& m : meta) c.push_back(m.tag == BlockTag::V ? 2 : 1);
    return c;
  }
};

// Replaces base edge k by a p-path carrying the word; transpose blocks run the path backwards.
// Edge (k, i) has index k*p + i; interior vertices are appended in the same order.
inline Linearization linearize(const LinearGraph& T, const StarWord& M, std::size_t K1, std::size_t K2,
                               std::size_t K3) {
  const std::size_t K = T.order();
  if (K1 + K2 + K3 != K)
    throw InvalidArgument("block sizes " + std::to_string(K1) + "+" + std::to_string(K2) + "+" + std::to_string(K3) +
                          " do not add up to the graph order " + std::to_string(K));
  if (K1 < 1) throw InvalidArgument("K1 must be at least 1");
  if (M.empty()) throw InvalidArgument("linearization needs a word of length >= 1");
  const std::size_t p = M.length();
  const std::size_t n0 = T.vertex_count();
  Linearization out{LinearGraph(0, {}), {}, K1, K2, K3, p};
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < K; ++k) {
    BlockTag tag = k < K1 ? BlockTag::U : (k < K1 + K2 ? BlockTag::T : BlockTag::V);
    // chain[0] = target w_k, chain[p] = source v_k
    std::vector<std::size_t> chain(p + 1);
    chain[0] = T.edge(k).target;
    chain[p] = T.edge(k).source;
    for (std::size_t i = 1; i < p; ++i) chain[i] = n0 + k * (p - 1) + (i - 1);
    for (std::size_t i = 0; i < p; ++i) {
      if (tag == BlockTag::T) edges.push_back({chain[i], chain[i + 1]});
      else edges.push_back({chain[i + 1], chain[i]});
      auto& l = M.letters()[i];
      out.meta.push_back({k, i, tag, l.index, l.star});
    }
  }
  out.graph = LinearGraph(n0 + K * (p - 1), edges);
  return out;
}

struct SplitGraphs {
  LinearGraph t1{0, {}}, t2{0, {}};
  std::vector<std::size_t> edges1, edges2;
  EdgeLabels labels1, labels2;
};

// T1 keeps U and transpose edges, T2 keeps V edges; both keep every vertex of T'.
inline SplitGraphs split_graphs(const LinearGraph& Tp, const std::vector<EdgeMeta>& meta) {
  if (meta.size() != Tp.order()) throw InvalidArgument("edge metadata does not match the graph order");
  SplitGraphs s;
  for (std::size_t k = 0; k < Tp.order(); ++k) {
    bool first = meta[k].tag != BlockTag::V;
    (first ? s.edges1 : s.edges2).push_back(k);
    auto& lab = first ? s.labels1 : s.labels2;
    lab.delta.push_back(meta[k].letter);
    lab.star.push_back(meta[k].star);
  }
  s.t1 = edge_subgraph(Tp, s.edges1);
  s.t2 = edge_subgraph(Tp, s.edges2);
  return s;
}

// (-1)^{k-1} (2k-2)! / ((k-1)! k!) for a cycle of length 2k.
inline std::int64_t cycle_coefficient(std::size_t k) {
  if (k == 0) throw InvalidArgument("cycle half-length must be positive");
  std::int64_t c = 1;  // Catalan(k-1)
  for (std::size_t j = 0; j + 1 < k; ++j) c = c * 2 * (2 * static_cast<std::int64_t>(j) + 1) / (static_cast<std::int64_t>(j) + 2);
  return (k % 2 == 1) ? c : -c;
}

// Limit of N^{-c(T)} E[Tr0_T] for Haar unitaries placed by the labels.
inline Rational haar_limit_injective(const LinearGraph& T, const EdgeLabels& lab) {
  auto info = cactus_decomposition(T);
  if (validity(T, lab, info) != Validity::Valid) return Rational(0);
  Rational r(1);
  for (auto& c : info.cycles) r *= Rational(cycle_coefficient(c.edges.size() / 2));
  return r;
}

struct SplittingCheck {
  cplx lhs = 0, rhs = 0;
  double residual = 0;
  bool degenerate = false;
};

// (N - n)! / N! as a double.
inline double falling_factorial_inverse(std::size_t N, std::size_t n) {
  double r = 1;
  for (std::size_t j = 0; j < n; ++j) r /= static_cast<double>(N - j);
  return r;
}

// Compares Tr0_{T'}(B1 (x) B2) with (N-|V'|)!/N! Tr0_{T1}(B1) Tr0_{T2}(B2), where T1 is spanned by the first
// legs(B1) edges of T' and T2 by the rest. B2 is expected to be S_N-invariant (e.g. an exact group average).
inline SplittingCheck splitting_identity_check(const LinearGraph& Tp, const TensorOperand& B1, const TensorOperand& B2) {
  if (B1.N() != B2.N()) throw InvalidArgument("B1 and B2 must share N");
  if (B1.legs() + B2.legs() != Tp.order())
    throw InvalidArgument("legs(B1) + legs(B2) must equal the order of T'");
  const std::size_t N = B1.N(), n = Tp.vertex_count();
  SplittingCheck out;
  if (N < n) {
    out.degenerate = true;
    return out;
  }
  std::vector<std::size_t> e1, e2;
  for (std::size_t k = 0; k < Tp.order(); ++k) (k < B1.legs() ? e1 : e2).push_back(k);
  out.lhs = injective_graph_trace(Tp, B1.tensor(B2));
  out.rhs = falling_factorial_inverse(N, n) * injective_graph_trace(edge_subgraph(Tp, e1), B1) *
            injective_graph_trace(edge_subgraph(Tp, e2), B2);
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

// One quotient T' of the linearized graph in the freeness ledger.
struct QuotientEntry {
  SetPartition partition;
  std::size_t multiplicity = 1;
  LinearGraph graph{0, {}};
  Rational eta;
  Validity t1_validity = Validity::NotCactus;
  std::size_t leaves_t1 = 0, leaves_t2 = 0, leaves_tp = 0;
  std::vector<StarWord> circuit_words;  // one per simple cycle of T1 when T1 is a forest of cacti
};

struct FreenessCertificate {
  std::string verdict;  // "VANISHES" or "INCONCLUSIVE"
  StarWord word;
  std::size_t K1 = 0, K2 = 0, K3 = 0;
  bool variance = false;
  std::size_t partitions = 0;
  int mirror_subgroup_rank = 0;
  Rational max_eta;
  std::vector<QuotientEntry> quotients;
};

inline constexpr std::size_t kMaxPredictVertices = 10;

// Enumerates the quotients T' >= T_M (or T_M |_| T_M* with the variance flag), records eta(T') and the
// validity of T1, and certifies the vanishing of the normalized limit.
inline FreenessCertificate predict_freeness_limit(const StarWord& M, const LinearGraph& T, std::size_t K1,
                                                  std::size_t K2, std::size_t K3, bool variance = false,
                                                  std::size_t threads = 1) {
  if (is_trivial(M)) throw InvalidArgument("word '" + M.to_string() + "' is trivial after free reduction");
  auto lin = linearize(T, M, K1, K2, K3);
  LinearGraph G = lin.graph;
  std::vector<EdgeMeta> meta = lin.meta;
  if (variance) {
    G = disjoint_union(lin.graph, adjoint_graph(lin.graph));
    for (auto m : lin.meta) {
      m.star = !m.star;
      meta.push_back(m);
    }
  }
  const std::size_t n = G.vertex_count();
  if (n > kMaxPredictVertices)
    throw ResourceLimit("linearized graph has " + std::to_string(n) + " vertices; quotient enumeration needs Bell(" +
                        std::to_string(n) + ") = " + std::to_string(bell_number(n)) + " partitions (limit " +
                        std::to_string(kMaxPredictVertices) + " vertices)");
  std::vector<int> color;
  for (auto& m : meta) color.push_back(m.tag == BlockTag::V ? 2 : 1);

  FreenessCertificate cert;
  cert.word = M;
  cert.K1 = K1;
  cert.K2 = K2;
  cert.K3 = K3;
  cert.variance = variance;
  cert.mirror_subgroup_rank = subgroup_rank(M, M.mirrored());

  std::map<std::pair<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>>, std::size_t> seen;
  for_each_partition(n, [&](const SetPartition& pi) {
    ++cert.partitions;
    auto q = canonical_form(quotient(G, pi));
    std::vector<std::pair<std::size_t, std::size_t>> key;
    for (auto& e : q.edges()) key.emplace_back(e.source, e.target);
    auto [it, fresh] = seen.emplace(std::make_pair(q.vertex_count(), key), cert.quotients.size());
    if (!fresh) {
      ++cert.quotients[it->second].multiplicity;
      return;
    }
    QuotientEntry e;
    e.partition = pi;
    e.graph = q;
    cert.quotients.push_back(std::move(e));
  });

  parallel_for(cert.quotients.size(), threads, [&](std::size_t i) {
    auto& e = cert.quotients[i];
    auto sp = split_graphs(e.graph, meta);
    auto info = cactus_decomposition(sp.t1);
    e.eta = eta(e.graph, color);
    e.t1_validity = validity(sp.t1, sp.labels1, info);
    e.leaves_t1 = leaf_count(sp.t1);
    e.leaves_t2 = leaf_count(sp.t2);
    e.leaves_tp = leaf_count(e.graph);
    if (info.cactus)
      for (auto& c : info.cycles) {
        std::vector<Letter> w;
        for (auto k : c.edges) w.push_back({sp.labels1.delta[k], sp.labels1.star[k]});
        e.circuit_words.emplace_back(w);
      }
  });

  bool blocked = false;
  for (std::size_t i = 0; i < cert.quotients.size(); ++i) {
    auto& e = cert.quotients[i];
    if (i == 0 || e.eta > cert.max_eta) cert.max_eta = e.eta;
    if (e.eta == Rational(0) && e.t1_validity == Validity::Valid) blocked = true;
  }
  cert.verdict = (!blocked && cert.max_eta <= Rational(0)) ? "VANISHES" : "INCONCLUSIVE";
  return cert;
}

}  // namespace traffic
