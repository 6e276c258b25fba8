#pragma once

#include <cmath>
#include <functional>

namespace edlab::math {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
inline constexpr double kSqrt2 = 1.4142135623730950488016887;

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Standard normal cdf through erfc, accurate in both tails.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Inverse standard normal cdf, Wichura's AS241 (PPND16) rational
// approximation. Absolute error is far below the 1e-9 the library needs.
double normal_quantile(double p);

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double softplus_deriv(double x) {
  return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Adaptive Simpson quadrature with absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol);

}  // namespace edlab::math
