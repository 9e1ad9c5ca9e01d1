#pragma once

#include <cstddef>
#include <span>

namespace mlelab {

/// Wilson score interval for a binomial proportion.
struct WilsonInterval {
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 1.0;
};

/// 95% Wilson interval by default (z = 1.959963984540054).
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials,
                               double z = 1.959963984540054);

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Throws DegenerateFit when fewer than two points or all x equal.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace mlelab
