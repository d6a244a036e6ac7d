#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "haar_limits.hpp"
#include "numeric.hpp"
#include "operand.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "star_word.hpp"
#include "state.hpp"
#include "statistics.hpp"

namespace traffic {

enum class VKind { Haar, CyclicShift };

// Shape of W_l = U_l^{(x)K1} (x) (U_l^t)^{(x)K2} (x) V_l.
struct WSpec {
  std::size_t K1 = 1, K2 = 0, K3 = 0;
  VKind vkind = VKind::Haar;
  std::size_t legs() const { return K1 + K2 + K3; }
};

inline std::vector<TensorOperand> build_W(const std::vector<Mat>& U, const std::vector<TensorOperand>& V,
                                          std::size_t K1, std::size_t K2, std::size_t K3) {
  if (K1 < 1) throw InvalidArgument("K1 must be at least 1");
  if (K3 > 0 && V.size() != U.size())
    throw InvalidArgument("U and V families differ in size (" + std::to_string(U.size()) + " vs " +
                          std::to_string(V.size()) + ")");
  std::vector<TensorOperand> W;
  for (std::size_t l = 0; l < U.size(); ++l) {
    std::vector<Mat> f(K1, U[l]);
    for (std::size_t k = 0; k < K2; ++k) f.push_back(U[l].transpose());
    if (K3 > 0) {
      if (V[l].legs() != K3 || !V[l].is_elementary())
        throw InvalidArgument("V_" + std::to_string(l + 1) + " must be an elementary tensor with K3 = " +
                              std::to_string(K3) + " legs");
      for (auto& m : V[l].factors()) f.push_back(m);
    }
    W.push_back(TensorOperand::factored(std::move(f)));
  }
  return W;
}

// Cyclic shift by s on [N].
inline Mat shift_matrix(std::size_t N, std::size_t s) {
  std::vector<std::size_t> p(N);
  for (std::size_t i = 0; i < N; ++i) p[i] = (i + s) % N;
  return permutation_matrix(p);
}

inline std::vector<TensorOperand> sample_W_family(const WSpec& spec, std::size_t L, std::size_t N, RngStream& rng) {
  std::vector<Mat> U;
  std::vector<TensorOperand> V;
  for (std::size_t l = 0; l < L; ++l) U.push_back(sample_haar_unitary(N, rng));
  if (spec.K3 > 0)
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<Mat> f;
      for (std::size_t j = 0; j < spec.K3; ++j)
        f.push_back(spec.vkind == VKind::Haar ? sample_haar_unitary(N, rng) : shift_matrix(N, l + j + 1));
      V.push_back(TensorOperand::factored(std::move(f)));
    }
  return build_W(U, V, spec.K1, spec.K2, spec.K3);
}

// M(W) computed leg by leg; the empty word gives the identity.
inline TensorOperand evaluate_word(const std::vector<TensorOperand>& W, const StarWord& M) {
  if (W.empty()) throw InvalidArgument("empty family");
  const std::size_t K = W.front().legs(), N = W.front().N();
  for (auto& l : M.letters())
    if (static_cast<std::size_t>(l.index) >= W.size())
      throw InvalidArgument("word uses letter " + std::to_string(l.index + 1) + " but the family has " +
                            std::to_string(W.size()) + " members");
  std::vector<Mat> legs;
  for (std::size_t k = 0; k < K; ++k) {
    Mat P = Mat::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (auto& l : M.letters()) {
      const Mat& f = W[static_cast<std::size_t>(l.index)].factors()[k];
      if (l.star) P = P * f.adjoint();
      else P = P * f;
    }
    legs.push_back(std::move(P));
  }
  return TensorOperand::factored(std::move(legs));
}

// Values psi(M(W)) over independent samples; sample s draws from the stream (seed, N, s).
inline std::vector<cplx> mc_values(const StateSpec& psi, const WSpec& spec, const StarWord& M, std::size_t samples,
                                   std::uint64_t seed, std::size_t threads = 1) {
  if (psi.K != spec.legs())
    throw InvalidArgument("state has " + std::to_string(psi.K) + " legs but the blocks give " +
                          std::to_string(spec.legs()));
  const std::size_t L = std::max<std::size_t>(1, static_cast<std::size_t>(M.alphabet()));
  std::vector<cplx> x(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    RngStream rng(seed, {psi.N, s});
    x[s] = apply_state(psi, evaluate_word(sample_W_family(spec, L, psi.N, rng), M));
  });
  return x;
}

inline MCReport mc_expectation(const StateSpec& psi, const WSpec& spec, const StarWord& M, std::size_t samples,
                               std::uint64_t seed, std::size_t threads = 1) {
  if (samples < 2) throw InvalidArgument("Monte-Carlo estimates need at least 2 samples");
  auto t0 = std::chrono::steady_clock::now();
  auto r = summarize(mc_values(psi, spec, M, samples, seed, threads), psi.N);
  r.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Sample variance of psi(M(W)) as the estimate, with its standard error.
inline MCReport mc_variance(const StateSpec& psi, const WSpec& spec, const StarWord& M, std::size_t samples,
                            std::uint64_t seed, std::size_t threads = 1) {
  auto r = mc_expectation(psi, spec, M, samples, seed, threads);
  MCReport v = r;
  v.estimate = r.variance;
  v.std_error = r.variance_std_error;
  return v;
}

enum class Group { SymmetricExact, SymmetricSampled, UnitarySampled };

// Average of psi(X^{(x)K} A X^{(x)K}*) over the group: every element of S_N (N <= 5) or a fixed sample.
inline Functional symmetrize(const Functional& psi, std::size_t N, Group g, std::size_t samples = 0,
                             std::uint64_t seed = 0) {
  std::vector<Mat> elems;
  if (g == Group::SymmetricExact) {
    if (N > 5) throw ResourceLimit("exact S_N average is limited to N <= 5 (N = " + std::to_string(N) + ")");
    std::vector<std::size_t> p(N);
    for (std::size_t i = 0; i < N; ++i) p[i] = i;
    do elems.push_back(permutation_matrix(p));
    while (std::next_permutation(p.begin(), p.end()));
  } else {
    if (samples < 1) throw InvalidArgument("sampled symmetrization needs samples >= 1");
    for (std::size_t s = 0; s < samples; ++s) {
      RngStream rng(seed, {0x5e77, s});
      elems.push_back(g == Group::UnitarySampled ? sample_haar_unitary(N, rng) : permutation_matrix(sample_permutation(N, rng)));
    }
  }
  return [psi, elems](const TensorOperand& A) {
    std::vector<cplx> v;
    for (auto& X : elems) v.push_back(psi(conjugate_legs(A, X)));
    return pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
  };
}

// Exact S_N average of an operand, kept as a sum of factored terms.
inline TensorOperand symmetrize_operand_exact(const TensorOperand& B) {
  if (B.is_dense()) throw InvalidArgument("exact symmetrization takes factored operands");
  const std::size_t N = B.N();
  if (N > 5) throw ResourceLimit("exact S_N average is limited to N <= 5 (N = " + std::to_string(N) + ")");
  std::vector<std::size_t> p(N);
  for (std::size_t i = 0; i < N; ++i) p[i] = i;
  std::vector<TensorOperand::Term> terms;
  double w = 1.0;
  for (std::size_t i = 2; i <= N; ++i) w /= static_cast<double>(i);
  do {
    auto c = conjugate_legs(B, permutation_matrix(p));
    for (auto t : c.terms()) {
      t.weight *= w;
      terms.push_back(std::move(t));
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return TensorOperand::sum(std::move(terms));
}

// N^{-c(T)} Tr0_T with edge e carrying U_{delta(e)} or its adjoint, over independent Haar samples.
inline MCReport haar_limit_mc(const LinearGraph& T, const EdgeLabels& lab, std::size_t N, std::size_t samples,
                              std::uint64_t seed, std::size_t threads = 1) {
  if (lab.delta.size() != T.order() || lab.star.size() != T.order())
    throw InvalidArgument("edge labels do not match the graph order");
  int L = 0;
  for (auto d : lab.delta) L = std::max(L, d + 1);
  std::vector<std::size_t> letter;
  for (std::size_t k = 0; k < T.order(); ++k) letter.push_back(2 * static_cast<std::size_t>(lab.delta[k]) + lab.star[k]);
  const double norm = std::pow(static_cast<double>(N), -static_cast<double>(T.component_count()));
  auto t0 = std::chrono::steady_clock::now();
  std::vector<cplx> x(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    RngStream rng(seed, {N, s});
    std::vector<Mat> f;
    for (int l = 0; l < L; ++l) {
      f.push_back(sample_haar_unitary(N, rng));
      f.push_back(f.back().adjoint());
    }
    x[s] = norm * injective_graph_trace(T, TensorOperand::factored(std::move(f)), letter);
  });
  auto r = summarize(x, N);
  r.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Per-sample residual Tr0_{T'}(B1 (x) B2^sigma) - (N-|V'|)!/N! Tr0_{T1}(B1) Tr0_{T2}(B2) for uniform sigma in S_N;
// its mean is zero exactly when the splitting identity holds.
inline MCReport splitting_identity_mc(const LinearGraph& Tp, const TensorOperand& B1, const TensorOperand& B2,
                                      std::size_t samples, std::uint64_t seed, std::size_t threads = 1) {
  if (B1.N() != B2.N()) throw InvalidArgument("B1 and B2 must share N");
  if (B1.legs() + B2.legs() != Tp.order()) throw InvalidArgument("legs(B1) + legs(B2) must equal the order of T'");
  const std::size_t N = B1.N();
  std::vector<std::size_t> e1, e2;
  for (std::size_t k = 0; k < Tp.order(); ++k) (k < B1.legs() ? e1 : e2).push_back(k);
  cplx rhs = 0;
  if (N >= Tp.vertex_count())
    rhs = falling_factorial_inverse(N, Tp.vertex_count()) * injective_graph_trace(edge_subgraph(Tp, e1), B1) *
          injective_graph_trace(edge_subgraph(Tp, e2), B2);
  std::vector<cplx> x(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    RngStream rng(seed, {0x5b17, s});
    auto B2s = conjugate_legs(B2, permutation_matrix(sample_permutation(N, rng)));
    x[s] = injective_graph_trace(Tp, B1.tensor(B2s)) - rhs;
  });
  return summarize(x, N);
}

enum class NormMode { HaarPair, ConjugatePair };

struct NormReport {
  double norm = 0;
  double target = 0;  // 2 sqrt(L-1) for independent pairs, L for conjugate pairs
  std::string method;
};

inline constexpr std::size_t kMaxNormDemoDim = 4096;

// Largest singular value of sum_l U_l (x) V_l with V_l independent Haar or conj(U_l).
inline NormReport norm_absorption_demo(std::size_t L, std::size_t N, NormMode mode, RngStream& rng) {
  if (L < 1) throw InvalidArgument("L must be at least 1");
  const std::size_t dim = N * N;
  if (dim > kMaxNormDemoDim)
    throw ResourceLimit("norm demo needs N^2 <= " + std::to_string(kMaxNormDemoDim) + " (N = " + std::to_string(N) + ")");
  std::vector<Mat> U, V;
  for (std::size_t l = 0; l < L; ++l) {
    U.push_back(sample_haar_unitary(N, rng));
    V.push_back(mode == NormMode::ConjugatePair ? Mat(U.back().conjugate()) : sample_haar_unitary(N, rng));
  }
  NormReport rep;
  rep.target = mode == NormMode::ConjugatePair ? static_cast<double>(L) : 2.0 * std::sqrt(static_cast<double>(L - 1));
  if (L == 1) rep.target = 1.0;
  const auto n = static_cast<Eigen::Index>(N);
  if (dim <= kMaxDenseDim) {
    Mat S = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t l = 0; l < L; ++l) S += kron(U[l], V[l]);
    Mat G = S.adjoint() * S;
    Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
    rep.norm = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    rep.method = "dense";
    return rep;
  }
  // (U (x) V) vec_r(X) = vec_r(U X V^t) with row-major vectorization.
  auto apply = [&](const Mat& X, bool adj) {
    Mat Y = Mat::Zero(n, n);
    for (std::size_t l = 0; l < L; ++l) {
      if (adj) Y += U[l].adjoint() * X * V[l].conjugate();
      else Y += U[l] * X * V[l].transpose();
    }
    return Y;
  };
  Mat X(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = rng.complex_normal();
  X /= X.norm();
  double lambda = 0;
  for (int it = 0; it < 20000; ++it) {
    Mat Y = apply(apply(X, false), true);
    double next = std::abs((X.adjoint() * Y).trace());
    X = Y / Y.norm();
    if (it > 10 && std::abs(next - lambda) <= 1e-6 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  rep.norm = std::sqrt(lambda);
  rep.method = "power";
  return rep;
}

}  // namespace traffic
