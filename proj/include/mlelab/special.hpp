#pragma once

#include <cmath>

namespace mlelab {

/// Standard normal CDF, computed through erfc so the tails keep full
/// relative accuracy (Phi(-38) is still representable).
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Standard normal density.
inline double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

/// log Gamma(x) for x > 0.  Thin wrapper so callers do not touch errno
/// semantics of the C library directly.
double log_gamma(double x);

/// log Beta(a, b) for a, b > 0.
double log_beta(double a, double b);

/// log(x!) for integer x >= 0; cached for small x (hot in Poisson code).
double log_factorial(long x);

/// Digamma psi(x) for x > 0.
double digamma(double x);

/// Trigamma psi'(x) for x > 0.
double trigamma(double x);

/// Tetragamma psi''(x) for x > 0.
double tetragamma(double x);

}  // namespace mlelab
