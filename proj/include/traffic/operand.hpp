#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace traffic {

// Largest N^K for which an operand may be held as a dense N^K x N^K matrix.
inline constexpr std::size_t kMaxDenseDim = 1024;

inline std::size_t int_pow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) {
    if (b != 0 && r > static_cast<std::size_t>(-1) / b) return static_cast<std::size_t>(-1);
    r *= b;
  }
  return r;
}

// Kronecker product, first factor slowest.
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Element of M_N(C)^{(x)K}: a weighted sum of elementary tensors, or a dense matrix.
class TensorOperand {
 public:
  struct Term {
    cplx weight;
    std::vector<Mat> factors;
  };

  TensorOperand() = default;

  static TensorOperand factored(std::vector<Mat> factors) {
    TensorOperand t;
    t.terms_.push_back({1.0, std::move(factors)});
    t.validate();
    return t;
  }
  static TensorOperand sum(std::vector<Term> terms) {
    if (terms.empty()) throw InvalidArgument("a sum operand needs at least one term");
    TensorOperand t;
    t.terms_ = std::move(terms);
    t.validate();
    return t;
  }
  static TensorOperand dense(Mat m, std::size_t N, std::size_t K) {
    if (K == 0 || N == 0) throw InvalidArgument("dense operand needs N, K >= 1");
    std::size_t dim = int_pow(N, K);
    if (dim > kMaxDenseDim)
      throw ResourceLimit("dense operand of dimension N^K = " + std::to_string(dim) + " exceeds " +
                          std::to_string(kMaxDenseDim));
    if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim)
      throw InvalidArgument("dense operand must be N^K x N^K");
    TensorOperand t;
    t.dense_ = std::move(m);
    t.N_ = N;
    t.K_ = K;
    return t;
  }
  static TensorOperand identity(std::size_t N, std::size_t K) {
    return factored(std::vector<Mat>(K, Mat::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N))));
  }

  bool is_dense() const { return terms_.empty(); }
  bool is_elementary() const { return terms_.size() == 1; }
  std::size_t N() const { return N_; }
  std::size_t legs() const { return K_; }
  const std::vector<Term>& terms() const { return terms_; }
  const std::vector<Mat>& factors() const {
    if (!is_elementary()) throw InvalidArgument("operand is not an elementary tensor");
    return terms_.front().factors;
  }
  const Mat& dense_matrix() const { return dense_; }

  Mat to_dense() const {
    if (is_dense()) return dense_;
    std::size_t dim = int_pow(N_, K_);
    if (dim > kMaxDenseDim)
      throw ResourceLimit("densifying N^K = " + std::to_string(dim) + " exceeds " + std::to_string(kMaxDenseDim));
    Mat out = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (auto& t : terms_) {
      Mat k = t.factors[0];
      for (std::size_t j = 1; j < t.factors.size(); ++j) k = kron(k, t.factors[j]);
      out += t.weight * k;
    }
    return out;
  }

  // Legwise product (A1 (x) ... )(B1 (x) ...) = A1B1 (x) ...
  TensorOperand operator*(const TensorOperand& o) const {
    check_compatible(o);
    if (is_dense() || o.is_dense()) return dense(to_dense() * o.to_dense(), N_, K_);
    std::vector<Term> out;
    for (auto& a : terms_)
      for (auto& b : o.terms_) {
        Term t{a.weight * b.weight, {}};
        for (std::size_t k = 0; k < K_; ++k) t.factors.push_back(a.factors[k] * b.factors[k]);
        out.push_back(std::move(t));
      }
    return sum(std::move(out));
  }

  TensorOperand adjoint() const {
    if (is_dense()) return dense(dense_.adjoint(), N_, K_);
    std::vector<Term> out;
    for (auto& a : terms_) {
      Term t{std::conj(a.weight), {}};
      for (auto& f : a.factors) t.factors.push_back(f.adjoint());
      out.push_back(std::move(t));
    }
    return sum(std::move(out));
  }

  // Tensor product of operands: legs of this first.
  TensorOperand tensor(const TensorOperand& o) const {
    if (is_dense() || o.is_dense()) throw InvalidArgument("tensor product of dense operands is not supported");
    if (N_ != o.N_) throw InvalidArgument("tensor product of operands with different N");
    std::vector<Term> out;
    for (auto& a : terms_)
      for (auto& b : o.terms_) {
        Term t{a.weight * b.weight, a.factors};
        t.factors.insert(t.factors.end(), b.factors.begin(), b.factors.end());
        out.push_back(std::move(t));
      }
    return sum(std::move(out));
  }

 private:
  void validate() {
    K_ = terms_.front().factors.size();
    if (K_ == 0) throw InvalidArgument("operand needs at least one leg");
    N_ = static_cast<std::size_t>(terms_.front().factors.front().rows());
    if (N_ == 0) throw InvalidArgument("operand factors must be non-empty");
    for (auto& t : terms_) {
      if (t.factors.size() != K_) throw InvalidArgument("all terms of a sum operand need the same number of legs");
      for (auto& f : t.factors)
        if (static_cast<std::size_t>(f.rows()) != N_ || static_cast<std::size_t>(f.cols()) != N_)
          throw InvalidArgument("operand factors must all be " + std::to_string(N_) + "x" + std::to_string(N_));
    }
  }
  void check_compatible(const TensorOperand& o) const {
    if (N_ != o.N_ || K_ != o.K_) throw InvalidArgument("operands differ in N or number of legs");
  }

  std::vector<Term> terms_;
  Mat dense_;
  std::size_t N_ = 0;
  std::size_t K_ = 0;
};

}  // namespace traffic
