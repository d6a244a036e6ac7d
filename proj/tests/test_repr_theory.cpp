#include <gtest/gtest.h>

#include <random>

#include "traffic/repr_theory.hpp"

using namespace traffic;

namespace {

using ld = long double;
using lcplx = std::complex<ld>;

Vec eigenvalues(const Mat& U) { return Eigen::ComplexEigenSolver<Mat>(U, false).eigenvalues(); }

lcplx det_ld(std::vector<std::vector<lcplx>> a) {
  const std::size_t n = a.size();
  lcplx det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) == 0) return 0;
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      lcplx f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

// Bialternant det(z_i^{w_j + N - j}) / det(z_i^{N - j}) in long double, divided by the hook-content dimension.
cplx weyl_ratio_oracle(const Signature& sig, const Vec& z);

// Dimension by the hook-content formula for the shifted partition w + m.
ld hook_content_dimension(const std::vector<long>& w, long m, std::size_t N) {
  std::vector<long> part;
  for (auto x : w) part.push_back(x + m);
  ld dim = 1;
  for (std::size_t i = 0; i < part.size(); ++i)
    for (long j = 0; j < part[i]; ++j) {
      long arm = part[i] - j - 1, leg = 0;
      for (std::size_t r = i + 1; r < part.size() && part[r] > j; ++r) ++leg;
      dim *= static_cast<ld>(static_cast<long>(N) + j - static_cast<long>(i)) / static_cast<ld>(arm + leg + 1);
    }
  return dim;
}

cplx weyl_ratio_oracle(const Signature& sig, const Vec& z) {
  const std::size_t N = static_cast<std::size_t>(z.size());
  auto w = sig.full(N);
  const long m = sig.mu.empty() ? 0 : sig.mu.front();
  std::vector<std::vector<lcplx>> num(N, std::vector<lcplx>(N)), den = num;
  for (std::size_t i = 0; i < N; ++i) {
    lcplx zi(z(static_cast<Eigen::Index>(i)).real(), z(static_cast<Eigen::Index>(i)).imag());
    for (std::size_t j = 0; j < N; ++j) {
      num[i][j] = std::pow(zi, static_cast<int>(w[j] + static_cast<long>(N - 1 - j)));
      den[i][j] = std::pow(zi, static_cast<int>(N - 1 - j));
    }
  }
  lcplx v = det_ld(num) / det_ld(den) / hook_content_dimension(w, m, N);
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

// Dual Jacobi-Trudi: s_p = det(e_{p'_i - i + j}) for a partition p, with e_k from the eigenvalues by subset recursion.
cplx dual_jacobi_trudi(const std::vector<long>& p, const Vec& z) {
  const std::size_t N = static_cast<std::size_t>(z.size());
  std::vector<cplx> e(N + 1, 0);
  e[0] = 1;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    for (std::size_t k = N; k > 0; --k) e[k] += z(i) * e[k - 1];
  std::vector<long> conj;
  for (long j = 0; j < (p.empty() ? 0 : p[0]); ++j) {
    long c = 0;
    for (auto x : p) c += x > j;
    conj.push_back(c);
  }
  const auto n = static_cast<Eigen::Index>(conj.size());
  if (n == 0) return 1;
  Mat J(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      long k = conj[static_cast<std::size_t>(i)] - i + j;
      J(i, j) = (k < 0 || k > static_cast<long>(N)) ? cplx(0) : e[static_cast<std::size_t>(k)];
    }
  return J.determinant();
}

cplx jacobi_trudi_character(const Signature& sig, const Vec& z) {
  const std::size_t N = static_cast<std::size_t>(z.size());
  auto w = sig.full(N);
  const long m = sig.mu.empty() ? 0 : sig.mu.front();
  std::vector<long> p;
  for (auto x : w)
    if (x + m > 0) p.push_back(x + m);
  cplx det = 1;
  for (Eigen::Index i = 0; i < z.size(); ++i) det *= z(i);
  return dual_jacobi_trudi(p, z) * std::pow(det, -static_cast<double>(m)) /
         static_cast<double>(hook_content_dimension(w, m, N));
}

Mat random_unitary(std::size_t N, std::uint64_t seed) {
  RngStream rng(seed, {N});
  return sample_haar_unitary(N, rng);
}

Mat random_matrix(std::size_t N, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd;
  Mat m(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * cplx(nd(gen), nd(gen));
  return m;
}

// Unitary with spectrum clustered in the arc |theta| <= 1, so tr U stays of order one.
Mat clustered_unitary(std::size_t N, RngStream& rng) {
  Mat V = sample_haar_unitary(N, rng);
  Vec d(static_cast<Eigen::Index>(N));
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::polar(1.0, 2 * rng.uniform() - 1);
  return V * d.asDiagonal() * V.adjoint();
}

const std::vector<Signature>& sample_signatures() {
  static const std::vector<Signature> s{
      Signature::make({1}, {}),     Signature::make({}, {1}),        Signature::make({2}, {}),
      Signature::make({1, 1}, {}),  Signature::make({1}, {1}),       Signature::make({1, 1}, {1}),
      Signature::make({3, 1}, {2}), Signature::make({2, 2}, {1, 1}), Signature::make({}, {3, 1})};
  return s;
}

}  // namespace

TEST(Signature, ParsingAndValidation) {
  auto s = Signature::parse("2,1", "1");
  EXPECT_EQ(s.lambda, (std::vector<int>{2, 1}));
  EXPECT_EQ(s.mu, (std::vector<int>{1}));
  EXPECT_EQ(s.full(5), (std::vector<long>{2, 1, 0, 0, -1}));
  EXPECT_TRUE(Signature::parse("", "").trivial());
  EXPECT_THROW(Signature::parse("1,2", ""), InvalidArgument);
  EXPECT_THROW(Signature::parse("0", ""), InvalidArgument);
  EXPECT_THROW(Signature::parse("x", ""), InvalidArgument);
  EXPECT_THROW(s.full(2), InvalidArgument);
}

TEST(Character, DimensionMatchesHookContent) {
  for (std::size_t N : {3u, 5u, 8u, 16u})
    for (auto& sig : sample_signatures()) {
      if (sig.length() > N) continue;
      auto w = sig.full(N);
      ld hc = hook_content_dimension(w, sig.mu.empty() ? 0 : sig.mu.front(), N);
      EXPECT_NEAR(character_dimension(sig, N).convert_to<double>(), static_cast<double>(hc), 1e-9 * static_cast<double>(hc))
          << sig.to_string() << " N=" << N;
    }
  EXPECT_EQ(character_dimension(Signature::make({1}, {1}), 10), BigInt(99));
  EXPECT_EQ(character_dimension(Signature::make({2}, {}), 10), BigInt(55));
}

TEST(Character, ClosedForms) {
  for (std::size_t N : {3u, 6u, 11u}) {
    Mat U = random_unitary(N, 1);
    const double n = static_cast<double>(N);
    cplx T = U.trace(), T2 = (U * U).trace();
    EXPECT_LE(std::abs(normalized_character(Signature::make({}, {}), U) - 1.0), 1e-15);
    EXPECT_LE(std::abs(normalized_character(Signature::make({1}, {}), U) - T / n), 1e-12);
    EXPECT_LE(std::abs(normalized_character(Signature::make({}, {1}), U) - std::conj(T) / n), 1e-12);
    EXPECT_LE(std::abs(normalized_character(Signature::make({1}, {1}), U) - (std::norm(T) - 1) / (n * n - 1)), 1e-12);
    EXPECT_LE(std::abs(normalized_character(Signature::make({2}, {}), U) - (T * T + T2) / (n * (n + 1))), 1e-12);
    EXPECT_LE(std::abs(normalized_character(Signature::make({1, 1}, {}), U) - (T * T - T2) / (n * (n - 1))), 1e-12);
  }
}

TEST(Character, AgreesWithBialternantAndJacobiTrudi) {
  for (std::size_t N : {3u, 4u, 6u}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      Mat U = random_unitary(N, 100 + seed);
      Vec z = eigenvalues(U);
      for (auto& sig : sample_signatures()) {
        if (sig.length() > N) continue;
        cplx chi = normalized_character(sig, U);
        EXPECT_LE(std::abs(chi - weyl_ratio_oracle(sig, z)), 1e-9) << sig.to_string() << " N=" << N;
        EXPECT_LE(std::abs(chi - jacobi_trudi_character(sig, z)), 1e-10) << sig.to_string() << " N=" << N;
      }
    }
  }
  // larger N against Jacobi-Trudi only
  Mat U = random_unitary(40, 7);
  Vec z = eigenvalues(U);
  for (auto& sig : sample_signatures())
    EXPECT_LE(std::abs(normalized_character(sig, U) - jacobi_trudi_character(sig, z)), 1e-9) << sig.to_string();
}

TEST(Character, RepeatedEigenvaluesNeedNoJitter) {
  const std::size_t N = 8;
  Mat I = Mat::Identity(N, N);
  for (auto& sig : sample_signatures()) {
    EXPECT_LE(std::abs(normalized_character(sig, I) - 1.0), 1e-9) << sig.to_string();
    // scalar matrices act by the central character
    cplx zeta = std::polar(1.0, 0.7);
    cplx want = std::pow(zeta, sig.weight_lambda() - sig.weight_mu());
    EXPECT_LE(std::abs(normalized_character(sig, Mat(zeta * I)) - want), 1e-9) << sig.to_string();
  }
  // a reflection with a degenerate spectrum against the closed form
  Mat R = I;
  R(0, 0) = R(1, 1) = -1;
  const double n = N;
  EXPECT_LE(std::abs(normalized_character(Signature::make({1}, {1}), R) - (16.0 - 1) / (n * n - 1)), 1e-12);
}

TEST(Character, ConjugationInvariance) {
  RngStream rng(3);
  for (std::size_t N : {4u, 12u}) {
    Mat U = sample_haar_unitary(N, rng), V = sample_haar_unitary(N, rng);
    for (auto& sig : sample_signatures()) {
      if (sig.length() > N) continue;
      EXPECT_LE(std::abs(normalized_character(sig, U) - normalized_character(sig, V * U * V.adjoint())), 1e-9);
    }
  }
}

TEST(Character, GuardsAndErrors) {
  EXPECT_THROW(normalized_character(Signature::make({1, 1}, {1}), Mat::Identity(2, 2)), InvalidArgument);
  EXPECT_THROW(normalized_character(Signature::make({1}, {}), Mat::Identity(2, 3)), InvalidArgument);
}

TEST(Character, AsymptoticUsesTotalWeight) {
  // (tr U)^{l(lambda)} fails at U = -I for lambda = (2); the weight |lambda| is the uniform leading term
  const std::size_t N = 16;
  Mat U = -Mat::Identity(N, N);
  auto sig = Signature::make({2}, {});
  EXPECT_LE(std::abs(normalized_character(sig, U) - 1.0), 1e-12);
  EXPECT_LE(std::abs(character_asymptotic(sig, U) - 1.0), 1e-12);
  EXPECT_GT(std::abs(normalized_character(sig, U) - std::pow(U.trace() / double(N), 1)), 1.9);
}

TEST(Character, AsymptoticErrorIsOrderOneOverN) {
  const std::vector<Signature> sigs{Signature::make({1}, {1}), Signature::make({2}, {}), Signature::make({1, 1}, {1})};
  auto asym = [](const Signature& sig, cplx t) { return std::pow(t, sig.weight_lambda()) * std::pow(std::conj(t), sig.weight_mu()); };
  double err[3][2] = {}, errc[3][2] = {};
  for (int which = 0; which < 2; ++which) {
    const std::size_t N = which ? 64 : 32;
    for (std::size_t s = 0; s < 200; ++s) {
      RngStream rng(21, {N, s});
      Mat U = sample_haar_unitary(N, rng), C = clustered_unitary(N, rng);
      Vec zu = eigenvalues(U), zc = eigenvalues(C);
      for (std::size_t i = 0; i < sigs.size(); ++i) {
        err[i][which] += std::abs(character_from_eigenvalues(sigs[i], zu) - asym(sigs[i], zu.mean())) / 200;
        errc[i][which] += std::abs(character_from_eigenvalues(sigs[i], zc) - asym(sigs[i], zc.mean())) / 200;
      }
    }
  }
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    EXPECT_LE(err[i][1], 0.6 * err[i][0]) << sigs[i].to_string();
    EXPECT_LE(errc[i][1], 0.6 * errc[i][0]) << sigs[i].to_string();
    EXPECT_LE(errc[i][1], 4.0 / 64) << sigs[i].to_string();
  }
  RngStream rng(1);
  Mat U = sample_haar_unitary(9, rng);
  for (auto& sig : sigs) EXPECT_LE(std::abs(character_asymptotic(sig, U) - asym(sig, U.trace() / 9.0)), 1e-15);
}

TEST(Character, HaarMeanVanishes) {
  const std::vector<Signature> sigs{Signature::make({1}, {1}), Signature::make({2}, {}), Signature::make({1, 1}, {1})};
  const std::size_t N = 32, S = 10000;
  std::vector<std::vector<cplx>> x(sigs.size(), std::vector<cplx>(S));
  parallel_for(S, 0, [&](std::size_t s) {
    RngStream rng(5, {s});
    Vec z = eigenvalues(sample_haar_unitary(N, rng));
    for (std::size_t i = 0; i < sigs.size(); ++i) x[i][s] = character_from_eigenvalues(sigs[i], z);
  });
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    auto r = summarize(x[i], N);
    EXPECT_LE(z_score(r, 0.0), 3.0) << sigs[i].to_string() << " " << r.estimate << " +- " << r.std_error;
  }
}

TEST(Character, WordsDecay) {
  auto sig = Signature::make({1}, {1});
  // U1 conj(U2): letters 1..2 are U, 3..4 their conjugates
  auto M = StarWord::parse("1,4");
  double prev = INFINITY;
  for (std::size_t N : {8u, 16u, 32u}) {
    auto r = character_word_mc(sig, M, 2, N, 400, 9, 0);
    double rms = std::sqrt(r.variance + std::norm(r.estimate));
    EXPECT_LT(rms, prev) << "N=" << N;
    prev = rms;
  }
  EXPECT_THROW(character_word_mc(sig, StarWord::parse("5"), 2, 8, 10, 1), InvalidArgument);
}

TEST(Permutations, BasicOperations) {
  Perm s{1, 2, 0}, t{1, 0, 2};
  EXPECT_EQ(compose(s, t), (Perm{2, 1, 0}));
  EXPECT_EQ(compose(s, inverse(s)), identity_permutation(3));
  EXPECT_EQ(cycle_count(s), 1u);
  EXPECT_EQ(cycle_count(t), 2u);
  EXPECT_EQ(all_permutations(4).size(), 24u);
  EXPECT_EQ(parse_permutation("2,3,1"), s);
  EXPECT_EQ(permutation_to_string(s), "2,3,1");
  EXPECT_THROW(parse_permutation("1,1"), InvalidArgument);
  EXPECT_THROW(parse_permutation("0,1"), InvalidArgument);
}

TEST(LegPermutation, IdentityAndSwap) {
  EXPECT_EQ(leg_permutation(identity_permutation(3), 2).dense(), Mat(Mat::Identity(8, 8)));
  Mat swap = Mat::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1;
  EXPECT_EQ(leg_permutation({1, 0}, 2).dense(), swap);
}

TEST(LegPermutation, MovesLegs) {
  // rho(sigma)(x_0 (x) x_1 (x) x_2) puts x_{sigma^{-1}(k)} on leg k
  std::mt19937_64 gen(1);
  std::vector<Vec> x;
  for (int k = 0; k < 3; ++k) x.push_back(random_matrix(3, gen).col(0));
  auto kron3 = [](const Vec& a, const Vec& b, const Vec& c) {
    Vec out(27);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) out(9 * i + 3 * j + k) = a(i) * b(j) * c(k);
    return out;
  };
  Perm s{1, 2, 0};
  Perm si = inverse(s);
  Vec got = leg_permutation(s, 3).apply(kron3(x[0], x[1], x[2]));
  EXPECT_LE((got - kron3(x[si[0]], x[si[1]], x[si[2]])).norm(), 1e-14);
}

TEST(LegPermutation, Homomorphism) {
  for (auto& s : all_permutations(3))
    for (auto& t : all_permutations(3)) {
      Mat lhs = leg_permutation(compose(s, t), 3).dense();
      EXPECT_EQ(lhs, Mat(leg_permutation(s, 3).dense() * leg_permutation(t, 3).dense()));
    }
}

TEST(LegPermutation, MatrixFormAndGuard) {
  auto rho = leg_permutation({2, 0, 1}, 4);
  Mat P = rho.matrix();
  EXPECT_EQ(P, rho.dense());
  auto big = leg_permutation({1, 2, 3, 0}, 17);
  EXPECT_THROW(big.matrix(), ResourceLimit);
  EXPECT_THROW(big.dense(), ResourceLimit);
  // the index action is still available
  EXPECT_EQ(big.image(1), 17u * 17u * 17u);
  EXPECT_NO_THROW(leg_permutation({1, 0, 3, 2}, 16).matrix());
}

TEST(CycleFactorization, AllPermutationsSmall) {
  std::mt19937_64 gen(4);
  for (std::size_t d = 1; d <= 4; ++d)
    for (std::size_t N : {2u, 3u, 5u, 8u}) {
      Mat A = random_matrix(N, gen, 1.0 / std::sqrt(double(N)));
      for (auto& s : all_permutations(d)) {
        auto r = cycle_factorization_check(A, s);
        EXPECT_LE(r.residual, 1e-10) << "d=" << d << " N=" << N;
      }
    }
}

TEST(CycleFactorization, IdentityMatrixCountsCycles) {
  for (std::size_t d = 1; d <= 4; ++d)
    for (auto& s : all_permutations(d)) {
      auto r = cycle_factorization_check(Mat::Identity(5, 5), s);
      EXPECT_LE(std::abs(r.lhs - std::pow(5.0, double(cycle_count(s)) - double(d))), 1e-15);
    }
}

TEST(CycleFactorization, DistinctFactorsAgainstDense) {
  std::mt19937_64 gen(5);
  const std::size_t N = 3;
  for (auto& s : all_permutations(3)) {
    std::vector<Mat> A{random_matrix(N, gen), random_matrix(N, gen), random_matrix(N, gen)};
    Mat dense = kron(kron(A[0], A[1]), A[2]) * leg_permutation(s, N).dense();
    cplx want = dense.trace() / 27.0;
    EXPECT_LE(std::abs(twisted_trace(A, s) - want), 1e-12);
    EXPECT_LE(std::abs(twisted_trace_direct(A, s) - want), 1e-12);
  }
}

TEST(LeftRegular, Examples) {
  // (x1, id), d = 2
  auto a = left_regular_check({StarWord::parse("1"), {0, 1}}, 1, 32, 2000, 3, 0);
  EXPECT_LE(z_score(a, 0.0), 3.0) << a.estimate << " +- " << a.std_error;
  // (empty, transposition): N^{-1} on every sample
  auto b = left_regular_check({StarWord(), {1, 0}}, 1, 32, 20, 3);
  EXPECT_LE(std::abs(b.estimate - 1.0 / 32), 1e-15);
  EXPECT_LE(b.std_error, 1e-15);
  EXPECT_THROW(left_regular_check({StarWord::parse("1,1*"), {0, 1}}, 1, 8, 10, 1), InvalidArgument);
  EXPECT_THROW(left_regular_check({StarWord::parse("3"), {0, 1}}, 1, 8, 10, 1), InvalidArgument);
}

TEST(LeftRegular, MixedWordsDecay) {
  // letter 3 is U1^t
  std::vector<PermutationWord> words{{StarWord::parse("1,2,1*,2*"), {0, 1}},
                                     {StarWord::parse("1,3"), {1, 0, 2}},
                                     {StarWord::parse("1,2*"), {1, 2, 0}}};
  for (auto& w : words) {
    double prev = INFINITY;
    for (std::size_t N : {4u, 8u, 16u}) {
      auto r = left_regular_check(w, 2, N, 400, 11, 0);
      double m = std::abs(r.estimate) + r.std_error;
      EXPECT_LT(m, prev) << w.free.to_string() << " N=" << N;
      prev = m;
    }
  }
}

TEST(SdOperand, ProductsAdjointsAndTraces) {
  std::mt19937_64 gen(6);
  const std::size_t N = 3;
  auto X = SdOperand::tensor({random_matrix(N, gen), random_matrix(N, gen), random_matrix(N, gen)}) *
               SdOperand::permutation({2, 0, 1}, N) +
           SdOperand::permutation({1, 0, 2}, N, cplx(0.5, 1));
  auto Y = SdOperand::permutation({0, 2, 1}, N) *
           SdOperand::tensor({random_matrix(N, gen), random_matrix(N, gen), random_matrix(N, gen)});
  Mat x = X.to_dense(), y = Y.to_dense();
  EXPECT_LE(((X * Y).to_dense() - x * y).norm(), 1e-10 * x.norm() * y.norm());
  EXPECT_LE((X.adjoint().to_dense() - x.adjoint()).norm(), 1e-12 * x.norm());
  EXPECT_LE(std::abs((X * Y).trace() - (x * y).trace() / 27.0), 1e-10 * x.norm() * y.norm());
  EXPECT_LE(((X - X).to_dense()).norm(), 1e-12);
}

TEST(ConditionalExpectation, FixesTheSpan) {
  for (auto& s : all_permutations(3)) {
    auto e = conditional_expectation_Sd(SdOperand::permutation(s, 5));
    auto perms = all_permutations(3);
    for (std::size_t i = 0; i < perms.size(); ++i)
      EXPECT_LE(std::abs(e.coefficients[i] - (perms[i] == s ? 1.0 : 0.0)), 1e-10);
  }
}

TEST(ConditionalExpectation, ProjectionProperties) {
  RngStream rng(8);
  std::mt19937_64 gen(8);
  const std::size_t N = 8, d = 2;
  auto A = SdOperand::tensor(std::vector<Mat>(d, sample_haar_unitary(N, rng)));
  auto E = conditional_expectation_Sd(A);
  // idempotent
  auto EE = conditional_expectation_Sd(E.to_operand());
  for (std::size_t i = 0; i < E.coefficients.size(); ++i) EXPECT_LE(std::abs(EE.coefficients[i] - E.coefficients[i]), 1e-9);
  EXPECT_LE(conditional_expectation_Sd(A - E.to_operand()).norm(), 1e-9);
  // the coefficients are trace moments: U (x) U = c_id 1 + c_swap rho((12)) + remainder
  auto perms = all_permutations(d);
  cplx t = A.terms()[0].factors[0].trace() / double(N), t2 = (A.terms()[0].factors[0] * A.terms()[0].factors[0]).trace() / double(N);
  Mat G = sd_gram(N, d);
  Vec b(2);
  b << t * t, t2 / double(N);
  Vec c = G.fullPivLu().solve(b);
  EXPECT_LE(std::abs(E.coefficients[0] - c(0)) + std::abs(E.coefficients[1] - c(1)), 1e-12);
  (void)gen;
}

TEST(ConditionalExpectation, BimoduleAndSelfAdjoint) {
  std::mt19937_64 gen(9);
  const std::size_t N = 5, d = 3;
  auto A = SdOperand::tensor({random_matrix(N, gen), random_matrix(N, gen), random_matrix(N, gen)}) +
           SdOperand::tensor({random_matrix(N, gen), random_matrix(N, gen), random_matrix(N, gen)}) *
               SdOperand::permutation({1, 2, 0}, N);
  auto B = SdOperand::tensor({random_matrix(N, gen), random_matrix(N, gen), random_matrix(N, gen)});
  auto EA = conditional_expectation_Sd(A);
  for (auto& s : all_permutations(d))
    for (auto& t : {Perm{0, 1, 2}, Perm{2, 1, 0}}) {
      auto lhs = conditional_expectation_Sd(SdOperand::permutation(s, N) * A * SdOperand::permutation(t, N));
      auto rhs = conditional_expectation_Sd(SdOperand::permutation(s, N) * EA.to_operand() * SdOperand::permutation(t, N));
      double diff = 0;
      for (std::size_t i = 0; i < lhs.coefficients.size(); ++i) diff += std::abs(lhs.coefficients[i] - rhs.coefficients[i]);
      EXPECT_LE(diff, 1e-9 * std::max(1.0, EA.norm()));
    }
  // <B, E(A)> = <E(B), A>
  cplx l = (B.adjoint() * EA.to_operand()).trace();
  cplx r = (conditional_expectation_Sd(B).to_operand().adjoint() * A).trace();
  EXPECT_LE(std::abs(l - r), 1e-9 * std::max(1.0, std::abs(l)));
}

TEST(ConditionalExpectation, Guards) {
  EXPECT_THROW(conditional_expectation_Sd(SdOperand::permutation({1, 0, 2}, 2)), IllConditioned);
  EXPECT_THROW(conditional_expectation_Sd(SdOperand::permutation({1, 0, 2, 4, 3}, 6)), ResourceLimit);
  // N = d is still invertible
  EXPECT_NO_THROW(conditional_expectation_Sd(SdOperand::permutation({1, 0, 2}, 3)));
}

TEST(Amalgam, CenteredMomentsDecay) {
  for (auto pattern : {std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{0, 1, 0, 1}}) {
    double prev = INFINITY;
    for (std::size_t N : {8u, 16u, 32u}) {
      auto r = amalgam_centered_moment(2, pattern, N, 100, 13, 0);
      EXPECT_LT(r.estimate.real(), prev) << "N=" << N;
      prev = r.estimate.real();
    }
  }
  EXPECT_THROW(amalgam_centered_moment(2, {0, 0}, 8, 10, 1), InvalidArgument);
}
