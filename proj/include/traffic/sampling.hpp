#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/QR>

#include "errors.hpp"
#include "numeric.hpp"
#include "operand.hpp"
#include "rng.hpp"

namespace traffic {

// Haar unitary: complex Ginibre, Householder QR, then the phases of diag(R) moved into Q.
inline Mat sample_haar_unitary(std::size_t N, RngStream& rng) {
  if (N == 0) throw InvalidArgument("unitary size must be positive");
  const auto n = static_cast<Eigen::Index>(N);
  Mat Z(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) Z(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<Mat> qr(Z);
  Mat Q = qr.householderQ();
  const Mat& R = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    cplx d = R(j, j);
    double a = std::abs(d);
    Q.col(j) *= a > 0 ? d / a : cplx(1.0);
  }
  return Q;
}

// Uniform permutation of [N] (Fisher-Yates).
inline std::vector<std::size_t> sample_permutation(std::size_t N, RngStream& rng) {
  std::vector<std::size_t> p(N);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = N; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

// P e_i = e_{perm[i]}.
inline Mat permutation_matrix(const std::vector<std::size_t>& perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Mat P = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) P(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]), i) = 1.0;
  return P;
}

// X^{(x)K} A X^{(x)K}*.
inline TensorOperand conjugate_legs(const TensorOperand& A, const Mat& X) {
  if (static_cast<std::size_t>(X.rows()) != A.N()) throw InvalidArgument("conjugating matrix has the wrong size");
  if (A.is_dense()) {
    Mat big = X;
    for (std::size_t k = 1; k < A.legs(); ++k) big = kron(big, X);
    return TensorOperand::dense(big * A.dense_matrix() * big.adjoint(), A.N(), A.legs());
  }
  std::vector<TensorOperand::Term> terms;
  for (auto& t : A.terms()) {
    TensorOperand::Term c{t.weight, {}};
    for (auto& f : t.factors) c.factors.push_back(X * f * X.adjoint());
    terms.push_back(std::move(c));
  }
  return TensorOperand::sum(std::move(terms));
}

}  // namespace traffic
