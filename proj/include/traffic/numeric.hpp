#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <boost/rational.hpp>

namespace traffic {

using cplx = std::complex<double>;
using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

// N^e for integer or half-integer e given as twice the exponent.
inline double pow_half(double n, long twice_exponent) {
  return std::pow(n, 0.5 * static_cast<double>(twice_exponent));
}

}  // namespace traffic
