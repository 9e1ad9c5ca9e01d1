#pragma once

#include <functional>
#include <span>

namespace mlelab {

/// Tolerances and refinement budget for numerical integration.
struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_level = 12;          // trapezoid halvings per panel
    long max_evals = 4000000;    // hard budget per call
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // conservative bound: last refinement difference
    long evals = 0;
};

/// Integrate f over (a, b); either endpoint may be infinite.
///
/// Infinite or finite endpoints are handled by tanh-sinh / exp-sinh /
/// sinh-sinh double-exponential transforms with level-doubling trapezoid
/// refinement, so integrable endpoint singularities (Beta-type densities)
/// converge without special casing.  `breakpoints` lists interior abscissae
/// where the integrand concentrates (density modes, say); the domain is split
/// there so each panel carries its mass near an endpoint, where the node
/// distribution clusters.
///
/// Throws QuadratureFailure when the tolerance cannot be met within the
/// level/eval budget, and DomainError for an empty or inverted interval.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec = {},
                           std::span<const double> breakpoints = {});

}  // namespace mlelab
