#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "contraction.hpp"
#include "errors.hpp"
#include "graph_invariants.hpp"
#include "linear_graph.hpp"
#include "numeric.hpp"
#include "operand.hpp"
#include "set_partition.hpp"

namespace traffic {

// Largest vertex count for injective traces through quotient enumeration (Bell(9) = 21147 quotients).
inline constexpr std::size_t kMaxInjectiveVertices = 9;
// Largest N^|V| summed term by term for dense operands.
inline constexpr std::size_t kMaxDenseTraceTerms = std::size_t(1) << 27;

namespace detail {

inline std::vector<std::size_t> resolve_letters(const LinearGraph& T, const TensorOperand& A,
                                                const std::vector<std::size_t>& letter_of_edge) {
  std::vector<std::size_t> letters = letter_of_edge;
  if (letters.empty()) {
    if (A.legs() != T.order())
      throw InvalidArgument("operand has " + std::to_string(A.legs()) + " legs for a graph of order " +
                            std::to_string(T.order()));
    for (std::size_t k = 0; k < T.order(); ++k) letters.push_back(k);
  }
  if (letters.size() != T.order()) throw InvalidArgument("letter_of_edge must have one entry per edge");
  for (auto l : letters)
    if (l >= A.legs()) throw InvalidArgument("letter_of_edge refers to leg " + std::to_string(l + 1) +
                                             " of an operand with " + std::to_string(A.legs()) + " legs");
  return letters;
}

inline cplx dense_trace(const LinearGraph& T, const TensorOperand& A, bool injective) {
  if (A.legs() != T.order()) throw InvalidArgument("dense operand legs must match the graph order");
  const std::size_t N = A.N(), n = T.vertex_count(), K = T.order();
  if (int_pow(N, n) > kMaxDenseTraceTerms) throw ResourceLimit("dense trace would sum N^|V| terms beyond the limit");
  const Mat& D = A.dense_matrix();
  std::vector<std::size_t> phi(n, 0);
  cplx total = 0;
  while (true) {
    bool ok = true;
    if (injective)
      for (std::size_t a = 0; a < n && ok; ++a)
        for (std::size_t b = a + 1; b < n && ok; ++b) ok = phi[a] != phi[b];
    if (ok) {
      std::size_t row = 0, col = 0;
      for (std::size_t k = 0; k < K; ++k) {
        row = row * N + phi[T.edge(k).target];
        col = col * N + phi[T.edge(k).source];
      }
      total += D(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }
    std::size_t i = 0;
    while (i < n && ++phi[i] == N) phi[i++] = 0;
    if (i == n) break;
  }
  return total;
}

inline void term_views(const LinearGraph& T, const TensorOperand::Term& t, const std::vector<std::size_t>& letters,
                       std::size_t term_index, std::vector<const Mat*>& mats, std::vector<std::string>& keys) {
  mats.resize(T.order());
  keys.resize(T.order());
  for (std::size_t k = 0; k < T.order(); ++k) {
    mats[k] = &t.factors[letters[k]];
    keys[k] = "t" + std::to_string(term_index) + "f" + std::to_string(letters[k]);
  }
}

}  // namespace detail

// Sum over all phi: V -> [N] of prod_e A_{letter(e)}(phi(target), phi(source)).
inline cplx graph_trace(const LinearGraph& T, const TensorOperand& A,
                        const std::vector<std::size_t>& letter_of_edge = {}) {
  if (A.is_dense()) {
    if (!letter_of_edge.empty()) throw InvalidArgument("letter_of_edge is not supported for dense operands");
    return detail::dense_trace(T, A, false);
  }
  auto letters = detail::resolve_letters(T, A, letter_of_edge);
  auto plan = contraction_plan(T);
  cplx total = 0;
  std::vector<const Mat*> mats;
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < A.terms().size(); ++i) {
    detail::term_views(T, A.terms()[i], letters, i, mats, keys);
    total += A.terms()[i].weight * contract_graph(T, mats, A.N(), plan);
  }
  return total;
}

// Same sum over injective phi, via Möbius inversion over the quotients of T.
inline cplx injective_graph_trace(const LinearGraph& T, const TensorOperand& A,
                                  const std::vector<std::size_t>& letter_of_edge = {}) {
  if (A.is_dense()) {
    if (!letter_of_edge.empty()) throw InvalidArgument("letter_of_edge is not supported for dense operands");
    return detail::dense_trace(T, A, true);
  }
  auto letters = detail::resolve_letters(T, A, letter_of_edge);
  const std::size_t n = T.vertex_count();
  if (n > A.N()) return 0.0;
  if (n == 0) return graph_trace(T, A, letter_of_edge);
  if (n > kMaxInjectiveVertices)
    throw ResourceLimit("injective trace over " + std::to_string(n) + " vertices needs Bell(" + std::to_string(n) +
                        ") = " + std::to_string(bell_number(n)) + " quotients; the limit is " +
                        std::to_string(kMaxInjectiveVertices) + " vertices");
  auto parts = enumerate_partitions(n);
  std::vector<LinearGraph> qs;
  std::vector<ContractionPlan> plans;
  qs.reserve(parts.size());
  for (auto& p : parts) {
    qs.push_back(quotient(T, p));
    plans.push_back(contraction_plan(qs.back()));
  }
  cplx total = 0;
  std::vector<const Mat*> mats;
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < A.terms().size(); ++i) {
    ContractionCache cache;
    detail::term_views(T, A.terms()[i], letters, i, mats, keys);
    cplx s = 0;
    for (std::size_t j = 0; j < parts.size(); ++j)
      s += static_cast<double>(mobius_from_discrete(parts[j])) * contract_graph(qs[j], mats, A.N(), plans[j], &cache, &keys);
    total += A.terms()[i].weight * s;
  }
  return total;
}

// tau: normalized by N^{c(T)}; of order one for Haar-type inputs.
inline cplx tau_trace(const LinearGraph& T, const TensorOperand& A, const std::vector<std::size_t>& letters = {}) {
  return graph_trace(T, A, letters) / std::pow(static_cast<double>(A.N()), static_cast<double>(T.component_count()));
}

// zeta: normalized by N^{L(T)/2}, the leaf-count scale.
inline cplx zeta_trace(const LinearGraph& T, const TensorOperand& A, const std::vector<std::size_t>& letters = {}) {
  return graph_trace(T, A, letters) / pow_half(static_cast<double>(A.N()), static_cast<long>(leaf_count(T)));
}

// Injective values Tr0_{T0^pi} from plain values Tr_{T0^pi}, both indexed like enumerate_partitions(2K).
template <class V>
std::vector<V> injective_from_plain(std::size_t K, const std::vector<V>& plain) {
  auto ps = enumerate_partitions(2 * K);
  if (plain.size() != ps.size()) throw InvalidArgument("table size must be Bell(2K)");
  std::vector<V> out(ps.size(), V(0));
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = 0; j < ps.size(); ++j)
      if (leq(ps[i], ps[j])) out[i] += V(mobius(ps[i], ps[j])) * plain[j];
  return out;
}

template <class V>
std::vector<V> plain_from_injective(std::size_t K, const std::vector<V>& inj) {
  auto ps = enumerate_partitions(2 * K);
  if (inj.size() != ps.size()) throw InvalidArgument("table size must be Bell(2K)");
  std::vector<V> out(ps.size(), V(0));
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = 0; j < ps.size(); ++j)
      if (leq(ps[i], ps[j])) out[i] += inj[j];
  return out;
}

// Unit-norm factored operand whose injective trace on T0^pi grows like N^{L/2}.
inline TensorOperand ms_optimality_witness(const SetPartition& pi, std::size_t N) {
  if (pi.size() % 2 || pi.size() == 0) throw InvalidArgument("witness needs a partition of 2K points");
  const std::size_t K = pi.size() / 2;
  if (N < 2 * K) throw InvalidArgument("witness needs N >= 2K (N = " + std::to_string(N) + ", 2K = " +
                                       std::to_string(2 * K) + ")");
  auto T = quotient(minimal_graph(K), pi);
  auto forest = forest_of_tec(T);
  const std::size_t m = forest.components.size();
  std::vector<std::size_t> fdeg(m, 0);
  for (auto& f : forest.forest_edges) {
    ++fdeg[f.a];
    ++fdeg[f.b];
  }
  const auto n = static_cast<Eigen::Index>(N);
  const std::size_t blocks = N / (2 * K);
  Mat B = Mat::Zero(n, n);
  for (std::size_t b = 0; b < blocks; ++b)
    B.block(static_cast<Eigen::Index>(2 * K * b), static_cast<Eigen::Index>(2 * K * b), static_cast<Eigen::Index>(2 * K),
            static_cast<Eigen::Index>(2 * K))
        .setConstant(1.0 / static_cast<double>(2 * K));
  std::vector<Mat> factors(K, B);
  // Bridges with exactly one leaf end: indicator on the non-leaf endpoint.
  std::vector<std::size_t> hub;
  std::vector<std::pair<std::size_t, bool>> one_leaf;
  for (auto& f : forest.forest_edges) {
    bool leaf_a = fdeg[f.a] == 1, leaf_b = fdeg[f.b] == 1;
    if (leaf_a == leaf_b) continue;
    const Edge& e = T.edge(f.edge);
    bool target_in_leaf = forest.component_of[e.target] == (leaf_a ? f.a : f.b);
    one_leaf.emplace_back(f.edge, target_in_leaf);
    hub.push_back(target_in_leaf ? e.source : e.target);
  }
  if (!hub.empty()) {
    auto pi0 = kernel(hub);
    const double s = 1.0 / std::sqrt(static_cast<double>(N));
    for (std::size_t l = 0; l < one_leaf.size(); ++l) {
      auto [k, target_in_leaf] = one_leaf[l];
      Mat A = Mat::Zero(n, n);
      auto idx = static_cast<Eigen::Index>(pi0.block_of(l));
      if (target_in_leaf) A.col(idx).setConstant(s);
      else A.row(idx).setConstant(s);
      factors[k] = A;
    }
  }
  return TensorOperand::factored(factors);
}

}  // namespace traffic
