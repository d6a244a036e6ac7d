#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "numeric.hpp"

namespace traffic {

// Pairwise summation in a fixed order.
template <class T>
T pairwise_sum(const T* x, std::size_t n) {
  if (n == 0) return T(0);
  if (n <= 8) {
    T s = x[0];
    for (std::size_t i = 1; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

// Monte-Carlo summary. std_error combines the real and imaginary standard errors in quadrature.
struct MCReport {
  cplx estimate = 0;
  double std_error = 0;
  double variance = 0;  // unbiased sample variance E|X - mean|^2
  double variance_std_error = 0;
  std::size_t samples = 0;
  std::size_t N = 0;
  double wallclock = 0;
};

inline MCReport summarize(const std::vector<cplx>& x, std::size_t N = 0) {
  MCReport s;
  s.samples = x.size();
  s.N = N;
  if (x.empty()) return s;
  const double n = static_cast<double>(x.size());
  s.estimate = pairwise_sum(x.data(), x.size()) / n;
  if (x.size() < 2) return s;
  std::vector<double> d2(x.size()), d4(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    d2[i] = std::norm(x[i] - s.estimate);
    d4[i] = d2[i] * d2[i];
  }
  double m2 = pairwise_sum(d2.data(), d2.size());
  double m4 = pairwise_sum(d4.data(), d4.size()) / n;
  s.variance = m2 / (n - 1);
  s.std_error = std::sqrt(s.variance / n);
  double spread = m4 - (m2 / n) * (m2 / n);
  s.variance_std_error = std::sqrt(std::max(0.0, spread) / n);
  return s;
}

// |estimate - target| measured in standard errors; zero spread counts as exact agreement only on equality.
inline double z_score(const MCReport& r, cplx target) {
  double d = std::abs(r.estimate - target);
  // agreement to rounding counts as exact
  if (d <= 1e-12 * std::max(1.0, std::abs(target))) return 0.0;
  if (r.std_error == 0) return INFINITY;
  return d / r.std_error;
}

}  // namespace traffic
