#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"
#include "numeric.hpp"
#include "operand.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "star_word.hpp"
#include "statistics.hpp"

namespace traffic {

// ---------------------------------------------------------------------------
// Permutations of [d] in one-line notation, 0-based: p[i] is the image of i.

using Perm = std::vector<std::size_t>;

inline Perm identity_permutation(std::size_t d) {
  Perm p(d);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

inline bool is_permutation(const Perm& p) {
  std::vector<char> seen(p.size(), 0);
  for (auto x : p) {
    if (x >= p.size() || seen[x]) return false;
    seen[x] = 1;
  }
  return true;
}

// (a b)(i) = a(b(i))
inline Perm compose(const Perm& a, const Perm& b) {
  require(a.size() == b.size(), "composing permutations of different degree");
  Perm c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[b[i]];
  return c;
}

inline Perm inverse(const Perm& p) {
  Perm q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[p[i]] = i;
  return q;
}

inline std::vector<std::vector<std::size_t>> cycles(const Perm& p) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<char> seen(p.size(), 0);
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> c;
    for (std::size_t i = s; !seen[i]; i = p[i]) {
      seen[i] = 1;
      c.push_back(i);
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline std::size_t cycle_count(const Perm& p) { return cycles(p).size(); }

// All of S_d in lexicographic order of one-line notation.
inline std::vector<Perm> all_permutations(std::size_t d) {
  std::vector<Perm> out;
  Perm p = identity_permutation(d);
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// "2,1,3" (1-based one-line notation).
inline Perm parse_permutation(const std::string& s) {
  Perm p;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      long v = std::stol(tok, &used);
      if (v < 1) throw InvalidArgument("");
      p.push_back(static_cast<std::size_t>(v - 1));
    } catch (const std::exception&) {
      throw InvalidArgument("bad permutation entry '" + tok + "'");
    }
  }
  if (p.empty() || !is_permutation(p)) throw InvalidArgument("'" + s + "' is not a permutation");
  return p;
}

inline std::string permutation_to_string(const Perm& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i] + 1);
  return s;
}

// ---------------------------------------------------------------------------
// Rational characters of U(N).

struct Signature {
  std::vector<int> lambda, mu;

  static Signature make(std::vector<int> lambda, std::vector<int> mu) {
    for (const auto* part : {&lambda, &mu})
      for (std::size_t i = 0; i < part->size(); ++i) {
        require((*part)[i] > 0, "signature parts must be positive");
        require(i == 0 || (*part)[i] <= (*part)[i - 1], "signature parts must be weakly decreasing");
      }
    return {std::move(lambda), std::move(mu)};
  }

  static Signature parse(const std::string& lambda, const std::string& mu) {
    auto read = [](const std::string& s) {
      std::vector<int> v;
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
          v.push_back(std::stoi(tok));
        } catch (const std::exception&) {
          throw InvalidArgument("bad signature part '" + tok + "'");
        }
      }
      return v;
    };
    return make(read(lambda), read(mu));
  }

  std::size_t length() const { return lambda.size() + mu.size(); }
  int weight_lambda() const { return std::accumulate(lambda.begin(), lambda.end(), 0); }
  int weight_mu() const { return std::accumulate(mu.begin(), mu.end(), 0); }
  bool trivial() const { return lambda.empty() && mu.empty(); }

  // Highest weight of length N: lambda, zeros, then -mu reversed.
  std::vector<long> full(std::size_t N) const {
    if (length() > N)
      throw InvalidArgument("signature of length " + std::to_string(length()) + " needs N >= " +
                            std::to_string(length()));
    std::vector<long> w(N, 0);
    for (std::size_t i = 0; i < lambda.size(); ++i) w[i] = lambda[i];
    for (std::size_t i = 0; i < mu.size(); ++i) w[N - 1 - i] = -mu[i];
    return w;
  }

  std::string to_string() const {
    auto join = [](const std::vector<int>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
      return s;
    };
    return "(" + join(lambda) + ";" + join(mu) + ")";
  }
};

using BigInt = boost::multiprecision::cpp_int;

// Dimension of the irreducible representation, exactly.
inline BigInt character_dimension(const Signature& sig, std::size_t N) {
  auto w = sig.full(N);
  BigInt num = 1, den = 1;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      if (w[i] == w[j]) continue;
      num *= BigInt(w[i] - w[j] + static_cast<long>(j - i));
      den *= BigInt(static_cast<long>(j - i));
    }
  return num / den;
}

// Normalized character from the eigenvalues z of U. The Schur ratio det(z_i^{l_j}) / det(z_i^{N-j}) equals det R,
// where row j of R holds the coefficients of z^{l_j} modulo prod_i (z - z_i).
inline cplx character_from_eigenvalues(const Signature& sig, const Vec& z) {
  const std::size_t N = static_cast<std::size_t>(z.size());
  if (N == 0) throw InvalidArgument("empty spectrum");
  auto w = sig.full(N);
  const long shift = sig.mu.empty() ? 0 : sig.mu.front();
  std::vector<long> l(N);
  for (std::size_t j = 0; j < N; ++j) l[j] = w[j] + shift + static_cast<long>(N - 1 - j);

  // monic characteristic polynomial: c[k] is the coefficient of z^k
  std::vector<cplx> c(N + 1, cplx(0));
  c[0] = 1;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = i + 1; k > 0; --k) c[k] = c[k - 1] - z(static_cast<Eigen::Index>(i)) * c[k];
    c[0] = -z(static_cast<Eigen::Index>(i)) * c[0];
  }

  const auto n = static_cast<Eigen::Index>(N);
  Mat R = Mat::Zero(n, n);
  std::vector<cplx> r(N, cplx(0));
  r[0] = 1;
  std::size_t row = N;  // rows are filled from the smallest exponent upwards
  for (long e = 0; row > 0; ++e) {
    if (e == l[row - 1]) {
      --row;
      for (std::size_t k = 0; k < N; ++k) R(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(N - 1 - k)) = r[k];
    }
    cplx top = r[N - 1];
    for (std::size_t k = N - 1; k > 0; --k) r[k] = r[k - 1] - top * c[k];
    r[0] = -top * c[0];
  }

  cplx value = R.partialPivLu().determinant();
  if (shift != 0) {
    cplx det = 1;
    for (Eigen::Index i = 0; i < n; ++i) det *= z(i);
    value *= std::pow(det, -static_cast<double>(shift));
  }
  value /= character_dimension(sig, N).convert_to<double>();
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag()) || std::abs(value) > 1 + 1e-6)
    throw IllConditioned("character evaluation lost accuracy (|chi| = " + std::to_string(std::abs(value)) + ")");
  return value;
}

inline cplx normalized_character(const Signature& sig, const Mat& U) {
  require(U.rows() == U.cols(), "character needs a square matrix");
  if (static_cast<std::size_t>(U.rows()) < sig.length())
    throw InvalidArgument("signature " + sig.to_string() + " needs N >= " + std::to_string(sig.length()));
  if (sig.trivial()) return 1.0;
  Eigen::ComplexEigenSolver<Mat> es(U, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigenvalue solver failed");
  return character_from_eigenvalues(sig, es.eigenvalues());
}

// Leading large-N form (tr U)^{|lambda|} (tr conj U)^{|mu|}.
inline cplx character_asymptotic(const Signature& sig, const Mat& U) {
  cplx t = U.trace() / static_cast<double>(U.rows());
  return std::pow(t, sig.weight_lambda()) * std::pow(std::conj(t), sig.weight_mu());
}

// chi(M(U, conj U)) over Haar samples; letters 1..K are U_k and K+1..2K their entrywise conjugates.
inline MCReport character_word_mc(const Signature& sig, const StarWord& M, std::size_t K, std::size_t N,
                                  std::size_t samples, std::uint64_t seed, std::size_t threads = 1) {
  require(samples >= 2, "Monte-Carlo estimates need at least 2 samples");
  require(K >= 1, "need at least one unitary");
  require(static_cast<std::size_t>(M.alphabet()) <= 2 * K, "word uses more than 2K letters");
  std::vector<cplx> x(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    RngStream rng(seed, {0xc4a2, N, s});
    std::vector<Mat> U;
    for (std::size_t k = 0; k < K; ++k) U.push_back(sample_haar_unitary(N, rng));
    Mat P = Mat::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (auto& l : M.letters()) {
      auto i = static_cast<std::size_t>(l.index);
      Mat f = i < K ? U[i] : Mat(U[i - K].conjugate());
      P = l.star ? Mat(P * f.adjoint()) : Mat(P * f);
    }
    x[s] = normalized_character(sig, P);
  });
  return summarize(x, N);
}

// Mean of |chi(U) - (tr U)^{|lambda|} (tr conj U)^{|mu|}| over Haar U.
inline MCReport character_asymptotic_error(const Signature& sig, std::size_t N, std::size_t samples,
                                           std::uint64_t seed, std::size_t threads = 1) {
  require(samples >= 2, "Monte-Carlo estimates need at least 2 samples");
  std::vector<cplx> x(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    RngStream rng(seed, {0xa5e, N, s});
    Mat U = sample_haar_unitary(N, rng);
    x[s] = std::abs(normalized_character(sig, U) - character_asymptotic(sig, U));
  });
  return summarize(x, N);
}

// ---------------------------------------------------------------------------
// Leg permutations on (C^N)^{(x)d}. Basis index i has digits i_0 ... i_{d-1}, leg 0 most significant.

inline constexpr std::size_t kMaxLegPermutationDim = 65536;

class LegPermutation {
 public:
  LegPermutation(Perm sigma, std::size_t N) : sigma_(std::move(sigma)), inv_(inverse(sigma_)), N_(N) {
    require(!sigma_.empty() && is_permutation(sigma_), "leg permutation needs a permutation of [d]");
    require(N >= 1, "N must be positive");
    dim_ = int_pow(N_, sigma_.size());
  }

  std::size_t N() const { return N_; }
  std::size_t d() const { return sigma_.size(); }
  std::size_t dim() const { return dim_; }
  const Perm& sigma() const { return sigma_; }

  // rho(sigma) e_i = e_{image(i)}; leg k of the image carries the digit of leg sigma^{-1}(k).
  std::size_t image(std::size_t i) const {
    auto in = digits(i);
    std::size_t j = 0;
    for (std::size_t k = 0; k < d(); ++k) j = j * N_ + in[inv_[k]];
    return j;
  }

  std::vector<std::size_t> digits(std::size_t i) const {
    std::vector<std::size_t> out(d());
    for (std::size_t k = d(); k-- > 0;) {
      out[k] = i % N_;
      i /= N_;
    }
    return out;
  }

  Vec apply(const Vec& v) const {
    require(static_cast<std::size_t>(v.size()) == dim_, "vector size is not N^d");
    Vec out(v.size());
    for (std::size_t i = 0; i < dim_; ++i)
      out(static_cast<Eigen::Index>(image(i))) = v(static_cast<Eigen::Index>(i));
    return out;
  }

  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> matrix() const {
    if (dim_ > kMaxLegPermutationDim)
      throw ResourceLimit("N^d = " + std::to_string(dim_) + " exceeds " + std::to_string(kMaxLegPermutationDim) +
                          "; use the index action");
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P(static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < dim_; ++i) P.indices()(static_cast<Eigen::Index>(i)) = static_cast<int>(image(i));
    return P;
  }

  Mat dense() const {
    if (dim_ > kMaxDenseDim)
      throw ResourceLimit("dense N^d = " + std::to_string(dim_) + " exceeds " + std::to_string(kMaxDenseDim));
    Mat M = Mat::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < dim_; ++i) M(static_cast<Eigen::Index>(image(i)), static_cast<Eigen::Index>(i)) = 1;
    return M;
  }

 private:
  Perm sigma_, inv_;
  std::size_t N_, dim_ = 0;
};

inline LegPermutation leg_permutation(const Perm& sigma, std::size_t N) { return LegPermutation(sigma, N); }

// tr^{(x)d}((A_0 (x) ... (x) A_{d-1}) rho(sigma)) by summing the diagonal through the index action.
inline cplx twisted_trace_direct(const std::vector<Mat>& A, const Perm& sigma) {
  require(!A.empty() && A.size() == sigma.size(), "need one factor per leg");
  const std::size_t N = static_cast<std::size_t>(A.front().rows());
  LegPermutation rho(sigma, N);
  if (rho.dim() > kMaxLegPermutationDim)
    throw ResourceLimit("N^d = " + std::to_string(rho.dim()) + " exceeds " + std::to_string(kMaxLegPermutationDim));
  const Perm inv = inverse(sigma);
  std::vector<cplx> terms(rho.dim());
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    auto dg = rho.digits(i);
    cplx t = 1;
    for (std::size_t k = 0; k < A.size(); ++k)
      t *= A[k](static_cast<Eigen::Index>(dg[k]), static_cast<Eigen::Index>(dg[inv[k]]));
    terms[i] = t;
  }
  return pairwise_sum(terms.data(), terms.size()) / std::pow(static_cast<double>(N), static_cast<double>(A.size()));
}

// The same trace as a product over cycles: each cycle k -> sigma^{-1}(k) -> ... contributes Tr(A_k A_{sigma^{-1}k} ...).
inline cplx twisted_trace(const std::vector<Mat>& A, const Perm& sigma) {
  require(!A.empty() && A.size() == sigma.size(), "need one factor per leg");
  const auto n = A.front().rows();
  const Perm inv = inverse(sigma);
  cplx value = std::pow(static_cast<double>(n), -static_cast<double>(A.size()));
  for (auto& c : cycles(inv)) {
    Mat P = A[c[0]];
    for (std::size_t i = 1; i < c.size(); ++i) P = P * A[c[i]];
    value *= P.trace();
  }
  return value;
}

struct FactorizationCheck {
  cplx lhs, rhs;
  double residual = 0;
};

// tr^{(x)d}(A^{(x)d} rho(sigma)) against N^{-d} prod_c Tr(A^{|c|}).
inline FactorizationCheck cycle_factorization_check(const Mat& A, const Perm& sigma) {
  require(A.rows() == A.cols(), "A must be square");
  const double N = static_cast<double>(A.rows());
  FactorizationCheck r;
  r.lhs = twisted_trace_direct(std::vector<Mat>(sigma.size(), A), sigma);
  r.rhs = std::pow(N, -static_cast<double>(sigma.size()));
  for (auto& c : cycles(sigma)) {
    Mat P = Mat::Identity(A.rows(), A.cols());
    for (std::size_t i = 0; i < c.size(); ++i) P = P * A;
    r.rhs *= P.trace();
  }
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

// ---------------------------------------------------------------------------
// Words in F_{2K} x S_d. Free letters 1..K act as U_k^{(x)d}, letters K+1..2K as (U_k^t)^{(x)d}.

struct PermutationWord {
  StarWord free;
  Perm sigma;

  bool trivial() const { return is_trivial(free) && sigma == identity_permutation(sigma.size()); }
  std::size_t d() const { return sigma.size(); }
};

inline Mat evaluate_free_word(const StarWord& w, const std::vector<Mat>& U) {
  const std::size_t K = U.size();
  const auto n = U.front().rows();
  Mat P = Mat::Identity(n, n);
  for (auto& l : w.letters()) {
    auto i = static_cast<std::size_t>(l.index);
    if (i >= 2 * K) throw InvalidArgument("letter " + std::to_string(i + 1) + " exceeds 2K = " + std::to_string(2 * K));
    Mat f = i < K ? U[i] : Mat(U[i - K].transpose());
    P = l.star ? Mat(P * f.adjoint()) : Mat(P * f);
  }
  return P;
}

inline constexpr double kFactorizationTolerance = 1e-10;

// Samples tr^{(x)d}(W^{(x)d} rho(sigma)) through the cycle factorization, checking it against the index action
// whenever N^d is within the leg-permutation guard.
inline MCReport left_regular_check(const PermutationWord& word, std::size_t K, std::size_t N, std::size_t samples,
                                   std::uint64_t seed, std::size_t threads = 1) {
  require(!word.sigma.empty() && is_permutation(word.sigma), "word needs a permutation of [d]");
  if (word.trivial()) throw InvalidArgument("the word is trivial in F_2K x S_d");
  require(samples >= 2, "Monte-Carlo estimates need at least 2 samples");
  require(K >= 1 && static_cast<std::size_t>(word.free.alphabet()) <= 2 * K, "word uses more than 2K letters");
  const bool direct = int_pow(N, word.d()) <= kMaxLegPermutationDim;
  std::vector<cplx> x(samples);
  std::vector<double> worst(samples, 0.0);
  parallel_for(samples, threads, [&](std::size_t s) {
    RngStream rng(seed, {0x1e9, N, s});
    std::vector<Mat> U;
    for (std::size_t k = 0; k < K; ++k) U.push_back(sample_haar_unitary(N, rng));
    Mat W = evaluate_free_word(word.free, U);
    std::vector<Mat> legs(word.d(), W);
    x[s] = twisted_trace(legs, word.sigma);
    if (direct) worst[s] = std::abs(twisted_trace_direct(legs, word.sigma) - x[s]);
  });
  double w = *std::max_element(worst.begin(), worst.end());
  if (w > kFactorizationTolerance)
    throw NumericalFailure("cycle factorization residual " + std::to_string(w) + " exceeds tolerance");
  return summarize(x, N);
}

// ---------------------------------------------------------------------------
// Operands of the form sum_t w_t (A_{t,0} (x) ... (x) A_{t,d-1}) rho(pi_t).

struct SdTerm {
  cplx weight = 1;
  std::vector<Mat> factors;
  Perm perm;
};

class SdOperand {
 public:
  SdOperand(std::size_t N, std::size_t d) : N_(N), d_(d) { require(N >= 1 && d >= 1, "N and d must be positive"); }

  static SdOperand permutation(const Perm& p, std::size_t N, cplx weight = 1) {
    require(is_permutation(p) && !p.empty(), "not a permutation");
    SdOperand o(N, p.size());
    o.terms_.push_back({weight, identities(N, p.size()), p});
    return o;
  }

  static SdOperand tensor(std::vector<Mat> factors) {
    require(!factors.empty(), "need at least one leg");
    const auto N = static_cast<std::size_t>(factors.front().rows());
    for (auto& f : factors)
      require(static_cast<std::size_t>(f.rows()) == N && static_cast<std::size_t>(f.cols()) == N,
              "legs must be N x N");
    SdOperand o(N, factors.size());
    o.terms_.push_back({1, std::move(factors), identity_permutation(o.d_)});
    return o;
  }

  static SdOperand from_operand(const TensorOperand& A) {
    if (A.is_dense()) throw InvalidArgument("dense operands have no leg factorization");
    SdOperand o(A.N(), A.legs());
    for (auto& t : A.terms()) o.terms_.push_back({t.weight, t.factors, identity_permutation(A.legs())});
    return o;
  }

  std::size_t N() const { return N_; }
  std::size_t d() const { return d_; }
  const std::vector<SdTerm>& terms() const { return terms_; }

  SdOperand operator+(const SdOperand& o) const {
    check(o);
    SdOperand r = *this;
    r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
    return r;
  }

  SdOperand operator*(cplx s) const {
    SdOperand r = *this;
    for (auto& t : r.terms_) t.weight *= s;
    return r;
  }

  SdOperand operator-(const SdOperand& o) const { return *this + o * cplx(-1); }

  // (A) rho(p) (B) rho(q) = (A . B_{p^{-1}(k)}) rho(p q)
  SdOperand operator*(const SdOperand& o) const {
    check(o);
    SdOperand r(N_, d_);
    for (auto& a : terms_) {
      Perm pinv = inverse(a.perm);
      for (auto& b : o.terms_) {
        SdTerm t{a.weight * b.weight, {}, compose(a.perm, b.perm)};
        for (std::size_t k = 0; k < d_; ++k) t.factors.push_back(a.factors[k] * b.factors[pinv[k]]);
        r.terms_.push_back(std::move(t));
      }
    }
    return r;
  }

  // ((A) rho(p))^* = (A^*_{p(k)}) rho(p^{-1})
  SdOperand adjoint() const {
    SdOperand r(N_, d_);
    for (auto& a : terms_) {
      SdTerm t{std::conj(a.weight), {}, inverse(a.perm)};
      for (std::size_t k = 0; k < d_; ++k) t.factors.push_back(a.factors[a.perm[k]].adjoint());
      r.terms_.push_back(std::move(t));
    }
    return r;
  }

  // Normalized trace tr_N^{(x)d}.
  cplx trace() const {
    std::vector<cplx> v;
    for (auto& t : terms_) v.push_back(t.weight * twisted_trace(t.factors, t.perm));
    return pairwise_sum(v.data(), v.size());
  }

  Mat to_dense() const {
    const std::size_t dim = int_pow(N_, d_);
    if (dim > kMaxDenseDim)
      throw ResourceLimit("dense N^d = " + std::to_string(dim) + " exceeds " + std::to_string(kMaxDenseDim));
    Mat out = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (auto& t : terms_) {
      Mat k = t.factors[0];
      for (std::size_t j = 1; j < d_; ++j) k = kron(k, t.factors[j]);
      out += t.weight * k * LegPermutation(t.perm, N_).dense();
    }
    return out;
  }

 private:
  static std::vector<Mat> identities(std::size_t N, std::size_t d) {
    return std::vector<Mat>(d, Mat::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N)));
  }
  void check(const SdOperand& o) const {
    require(o.N_ == N_ && o.d_ == d_, "operands live on different spaces");
  }

  std::size_t N_, d_;
  std::vector<SdTerm> terms_;
};

// Element sum_sigma c_sigma rho(sigma) of the S_d span, coefficients indexed like all_permutations(d).
struct SdElement {
  std::size_t N = 0, d = 0;
  std::vector<cplx> coefficients;

  SdOperand to_operand() const {
    auto perms = all_permutations(d);
    SdOperand o(N, d);
    for (std::size_t i = 0; i < perms.size(); ++i) o = o + SdOperand::permutation(perms[i], N, coefficients[i]);
    return o;
  }

  double norm() const {
    double s = 0;
    for (auto& c : coefficients) s += std::norm(c);
    return std::sqrt(s);
  }
};

inline constexpr std::size_t kMaxAmalgamLegs = 4;

// Gram matrix tr(rho(sigma)^* rho(tau)) = N^{#cycles(sigma^{-1} tau) - d}.
inline Mat sd_gram(std::size_t N, std::size_t d) {
  auto perms = all_permutations(d);
  const auto m = static_cast<Eigen::Index>(perms.size());
  Mat G(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) {
      auto c = cycle_count(compose(inverse(perms[static_cast<std::size_t>(a)]), perms[static_cast<std::size_t>(b)]));
      G(a, b) = std::pow(static_cast<double>(N), static_cast<double>(c) - static_cast<double>(d));
    }
  return G;
}

// Orthogonal projection onto span{rho(sigma)} for the inner product tr(X^* Y).
inline SdElement conditional_expectation_Sd(const SdOperand& A) {
  const std::size_t N = A.N(), d = A.d();
  if (d > kMaxAmalgamLegs)
    throw ResourceLimit("d = " + std::to_string(d) + " exceeds " + std::to_string(kMaxAmalgamLegs));
  if (N < d) throw IllConditioned("the leg permutations are linearly dependent for N < d");
  auto perms = all_permutations(d);
  Mat G = sd_gram(N, d);
  Vec b(static_cast<Eigen::Index>(perms.size()));
  for (std::size_t i = 0; i < perms.size(); ++i)
    b(static_cast<Eigen::Index>(i)) = (SdOperand::permutation(inverse(perms[i]), N) * A).trace();
  Eigen::FullPivLU<Mat> lu(G);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) throw IllConditioned("Gram matrix of the leg permutations is singular");
  Vec c = lu.solve(b);
  SdElement e{N, d, {}};
  for (Eigen::Index i = 0; i < c.size(); ++i) e.coefficients.push_back(c(i));
  return e;
}

// Mean norm of E(c_1 ... c_l) for centered c_j = U_{p_j}^{(x)d} - E(U_{p_j}^{(x)d}), with consecutive p_j distinct.
inline MCReport amalgam_centered_moment(std::size_t d, const std::vector<std::size_t>& pattern, std::size_t N,
                                        std::size_t samples, std::uint64_t seed, std::size_t threads = 1) {
  require(!pattern.empty(), "empty pattern");
  require(samples >= 2, "Monte-Carlo estimates need at least 2 samples");
  for (std::size_t i = 1; i < pattern.size(); ++i) require(pattern[i] != pattern[i - 1], "pattern must alternate");
  const std::size_t K = *std::max_element(pattern.begin(), pattern.end()) + 1;
  std::vector<cplx> x(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    RngStream rng(seed, {0xa3a1, N, s});
    std::vector<SdOperand> centered;
    for (std::size_t k = 0; k < K; ++k) {
      auto a = SdOperand::tensor(std::vector<Mat>(d, sample_haar_unitary(N, rng)));
      centered.push_back(a - conditional_expectation_Sd(a).to_operand());
    }
    SdOperand prod = centered[pattern[0]];
    for (std::size_t i = 1; i < pattern.size(); ++i) prod = prod * centered[pattern[i]];
    x[s] = conditional_expectation_Sd(prod).norm();
  });
  return summarize(x, N);
}

}  // namespace traffic
