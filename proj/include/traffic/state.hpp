#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linear_graph.hpp"
#include "numeric.hpp"
#include "operand.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "set_partition.hpp"
#include "statistics.hpp"
#include "tensor_traces.hpp"

namespace traffic {

using Functional = std::function<cplx(const TensorOperand&)>;

enum class StateKind { Tracial, MaxEntangled, DiagonalUniform, ElementaryCombination };

inline std::string to_string(StateKind k) {
  switch (k) {
    case StateKind::Tracial: return "tracial";
    case StateKind::MaxEntangled: return "entangled";
    case StateKind::DiagonalUniform: return "diagonal";
    case StateKind::ElementaryCombination: return "coeffs";
  }
  return "?";
}

struct StateSpec {
  StateKind kind = StateKind::Tracial;
  std::size_t K = 1, N = 1;
  std::vector<cplx> coefficients;  // indexed like enumerate_partitions(2K)

  static StateSpec tracial(std::size_t N, std::size_t K) { return make(StateKind::Tracial, N, K); }
  static StateSpec max_entangled(std::size_t N, std::size_t K) {
    if (K % 2) throw InvalidArgument("the maximally entangled state needs an even number of legs (K = " +
                                     std::to_string(K) + ")");
    return make(StateKind::MaxEntangled, N, K);
  }
  static StateSpec diagonal_uniform(std::size_t N, std::size_t K) { return make(StateKind::DiagonalUniform, N, K); }
  static StateSpec elementary_combination(std::size_t N, std::size_t K, std::vector<cplx> coeffs);

 private:
  static StateSpec make(StateKind kind, std::size_t N, std::size_t K) {
    if (N == 0 || K == 0) throw InvalidArgument("states need N, K >= 1");
    StateSpec s;
    s.kind = kind;
    s.N = N;
    s.K = K;
    return s;
  }
};

namespace detail {

inline cplx state_on_factors(const StateSpec& s, const std::vector<Mat>& f) {
  const double N = static_cast<double>(s.N);
  cplx r = 1;
  switch (s.kind) {
    case StateKind::Tracial:
      for (auto& a : f) r *= a.trace() / N;
      return r;
    case StateKind::MaxEntangled:
      for (std::size_t j = 0; j + 1 < f.size(); j += 2) r *= (f[j].array() * f[j + 1].array()).sum() / N;
      return r;
    case StateKind::DiagonalUniform: {
      cplx total = 0;
      for (Eigen::Index i = 0; i < f[0].rows(); ++i) {
        cplx p = 1;
        for (auto& a : f) p *= a(i, i);
        total += p;
      }
      return total / N;
    }
    case StateKind::ElementaryCombination: break;
  }
  throw InvalidArgument("not a product state");
}

inline cplx state_on_dense(const StateSpec& s, const Mat& D) {
  const std::size_t N = s.N, K = s.K;
  const double Nd = static_cast<double>(N);
  auto index = [&](const std::vector<std::size_t>& m) {
    std::size_t r = 0;
    for (auto x : m) r = r * N + x;
    return static_cast<Eigen::Index>(r);
  };
  switch (s.kind) {
    case StateKind::Tracial: return D.trace() / std::pow(Nd, static_cast<double>(K));
    case StateKind::DiagonalUniform: {
      cplx t = 0;
      for (std::size_t i = 0; i < N; ++i) {
        auto id = index(std::vector<std::size_t>(K, i));
        t += D(id, id);
      }
      return t / Nd;
    }
    case StateKind::MaxEntangled: {
      const std::size_t pairs = K / 2, count = int_pow(N, pairs);
      std::vector<Eigen::Index> support;
      for (std::size_t c = 0; c < count; ++c) {
        std::vector<std::size_t> m(K);
        std::size_t x = c;
        for (std::size_t j = pairs; j-- > 0;) {
          m[2 * j] = m[2 * j + 1] = x % N;
          x /= N;
        }
        support.push_back(index(m));
      }
      cplx t = 0;
      for (auto a : support)
        for (auto b : support) t += D(a, b);
      return t / std::pow(Nd, static_cast<double>(pairs));
    }
    case StateKind::ElementaryCombination: break;
  }
  throw InvalidArgument("not a product state");
}

}  // namespace detail

inline cplx apply_state(const StateSpec& s, const TensorOperand& A) {
  if (A.legs() != s.K)
    throw InvalidArgument("state on " + std::to_string(s.K) + " legs applied to an operand with " +
                          std::to_string(A.legs()) + " legs");
  if (A.N() != s.N)
    throw InvalidArgument("state of dimension " + std::to_string(s.N) + " applied to an operand of dimension " +
                          std::to_string(A.N()));
  if (s.kind == StateKind::ElementaryCombination) {
    auto ps = enumerate_partitions(2 * s.K);
    auto T0 = minimal_graph(s.K);
    cplx r = 0;
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (s.coefficients[i] != cplx(0)) r += s.coefficients[i] * graph_trace(quotient(T0, ps[i]), A);
    return r;
  }
  if (A.is_dense()) return detail::state_on_dense(s, A.dense_matrix());
  cplx r = 0;
  for (auto& t : A.terms()) r += t.weight * detail::state_on_factors(s, t.factors);
  return r;
}

inline StateSpec StateSpec::elementary_combination(std::size_t N, std::size_t K, std::vector<cplx> coeffs) {
  auto s = make(StateKind::ElementaryCombination, N, K);
  detail::check_enumerable(2 * K);
  if (coeffs.size() != bell_number(2 * K))
    throw InvalidArgument("elementary combination needs Bell(2K) = " + std::to_string(bell_number(2 * K)) +
                          " coefficients, got " + std::to_string(coeffs.size()));
  s.coefficients = std::move(coeffs);
  cplx one = apply_state(s, TensorOperand::identity(N, K));
  if (std::abs(one - 1.0) > 1e-9)
    throw InvalidArgument("elementary combination is not unital: psi(1) = " + std::to_string(one.real()) + " + " +
                          std::to_string(one.imag()) + "i");
  return s;
}

inline Functional as_functional(const StateSpec& s) {
  return [s](const TensorOperand& A) { return apply_state(s, A); };
}

// E_{i,j} = E_{i1 j1} (x) ... (x) E_{iK jK}.
inline TensorOperand matrix_unit(std::size_t N, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  std::vector<Mat> f;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Mat e = Mat::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    e(static_cast<Eigen::Index>(rows[k]), static_cast<Eigen::Index>(cols[k])) = 1.0;
    f.push_back(std::move(e));
  }
  return TensorOperand::factored(std::move(f));
}

// Coefficients a_{N,pi} with psi = sum_pi a_pi Tr_{T0^pi}, indexed like enumerate_partitions(2K).
inline std::vector<cplx> decompose_invariant_state(const Functional& psi, std::size_t K, std::size_t N,
                                                   std::size_t invariance_samples = 32, std::uint64_t seed = 0) {
  if (N < 2 * K)
    throw InvalidArgument("decomposition needs N >= 2K (N = " + std::to_string(N) + ", K = " + std::to_string(K) + ")");
  auto ps = enumerate_partitions(2 * K);
  std::vector<cplx> B(ps.size());
  for (std::size_t a = 0; a < ps.size(); ++a) {
    std::vector<std::size_t> rows(K), cols(K);
    for (std::size_t k = 0; k < K; ++k) {
      rows[k] = ps[a].block_of(k);
      cols[k] = ps[a].block_of(K + k);
    }
    B[a] = psi(matrix_unit(N, rows, cols));
  }
  // Invariance: a uniformly relabeled multi-index must give the same value as its kernel representative.
  RngStream rng(seed, {0x1a7e});
  for (std::size_t s = 0; s < invariance_samples; ++s) {
    std::vector<std::size_t> rows(K), cols(K);
    for (auto& r : rows) r = rng.below(N);
    for (auto& c : cols) c = rng.below(N);
    auto perm = sample_permutation(N, rng);
    std::vector<std::size_t> all(rows);
    all.insert(all.end(), cols.begin(), cols.end());
    auto ker = kernel(all);
    auto pos = std::lower_bound(ps.begin(), ps.end(), ker) - ps.begin();
    std::vector<std::size_t> pr(K), pc(K);
    for (std::size_t k = 0; k < K; ++k) {
      pr[k] = perm[rows[k]];
      pc[k] = perm[cols[k]];
    }
    cplx v1 = psi(matrix_unit(N, rows, cols)), v2 = psi(matrix_unit(N, pr, pc));
    double scale = std::max(1.0, std::abs(B[static_cast<std::size_t>(pos)]));
    if (std::abs(v1 - B[static_cast<std::size_t>(pos)]) > 1e-9 * scale || std::abs(v2 - v1) > 1e-9 * scale)
      throw NotInvariant("functional is not S_N-invariant: values differ on the kernel " + ker.to_string());
  }
  std::vector<cplx> a(ps.size(), 0.0);
  for (std::size_t j = 0; j < ps.size(); ++j)
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (leq(ps[i], ps[j])) a[j] += B[i] * static_cast<double>(mobius(ps[i], ps[j]));
  return a;
}

// sum_pi a_pi Tr_{T0^pi}(A).
inline cplx reconstruct_from_coefficients(const std::vector<cplx>& a, const TensorOperand& A) {
  auto ps = enumerate_partitions(2 * A.legs());
  if (a.size() != ps.size()) throw InvalidArgument("coefficient table does not match the operand legs");
  auto T0 = minimal_graph(A.legs());
  cplx r = 0;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (a[i] != cplx(0)) r += a[i] * graph_trace(quotient(T0, ps[i]), A);
  return r;
}

inline TensorOperand all_ones_probe(std::size_t N, std::size_t K) {
  return TensorOperand::factored(
      std::vector<Mat>(K, Mat::Ones(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N))));
}

// Random diagonals D_1..D_{2K} for the block selector of pi: D_l = Dbar_C Dtilde_C with C the block of l.
inline std::vector<Vec> coefficient_selector(const SetPartition& pi, std::size_t N, RngStream& rng) {
  const std::size_t m = pi.block_count();
  std::size_t bits = 0;
  while ((std::size_t(1) << bits) < m) ++bits;
  auto sizes = pi.block_sizes();
  const auto n = static_cast<Eigen::Index>(N);
  std::vector<Vec> blockD(m, Vec::Zero(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::uint64_t code = bits ? rng.below(std::uint64_t(1) << bits) : 0;
    for (std::size_t c = 0; c < m; ++c) {
      std::uint64_t r = rng.below(sizes[c]);
      if (code != c) continue;
      double mag = std::pow(2.0, static_cast<double>(bits) / static_cast<double>(sizes[c]));
      double ang = 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(sizes[c]);
      blockD[c](i) = std::polar(mag, ang);
    }
  }
  std::vector<Vec> D(pi.size());
  for (std::size_t l = 0; l < pi.size(); ++l) D[l] = blockD[pi.block_of(l)];
  return D;
}

// Leg k of D^L A D^R is D_k A_k D_{K+k}.
inline TensorOperand sandwich(const std::vector<Vec>& D, const TensorOperand& A) {
  const std::size_t K = A.legs();
  if (D.size() != 2 * K) throw InvalidArgument("sandwich needs 2K diagonals");
  if (A.is_dense()) throw InvalidArgument("sandwich takes factored operands");
  std::vector<TensorOperand::Term> terms;
  for (auto& t : A.terms()) {
    TensorOperand::Term c{t.weight, {}};
    for (std::size_t k = 0; k < K; ++k) c.factors.push_back(D[k].asDiagonal() * t.factors[k] * D[K + k].asDiagonal());
    terms.push_back(std::move(c));
  }
  return TensorOperand::sum(std::move(terms));
}

// Monte-Carlo estimate of b_{N,pi} = sum_{pi' <= pi} a_{N,pi'} from psi(D^L A D^R) on a probe A.
inline MCReport randomized_coefficient_extract(const Functional& psi, const SetPartition& pi, std::size_t K,
                                               std::size_t N, std::size_t samples, std::uint64_t seed,
                                               std::size_t threads = 1, const TensorOperand* probe = nullptr) {
  if (pi.size() != 2 * K) throw InvalidArgument("partition must live on 2K points");
  if (N < 2 * K) throw InvalidArgument("coefficient extraction needs N >= 2K");
  if (samples < 1) throw InvalidArgument("samples must be at least 1");
  TensorOperand A = probe ? *probe : all_ones_probe(N, K);
  if (A.legs() != K || A.N() != N) throw InvalidArgument("probe operand has the wrong shape");
  cplx norm = injective_graph_trace(quotient(minimal_graph(K), pi), A);
  if (std::abs(norm) < 1e-12)
    throw ProbeFailure("probe operand has vanishing injective trace on the quotient " + pi.to_string() +
                       "; choose a different probe");
  std::vector<cplx> x(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    RngStream rng(seed, {0xc0ef, s});
    x[s] = psi(sandwich(coefficient_selector(pi, N, rng), A)) / norm;
  });
  return summarize(x, N);
}

}  // namespace traffic
