#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mlelab/family.hpp"

namespace mlelab {

/// Parameters of the location-and-exponential family density
/// q(u) = |gamma| (alpha/e)^alpha / Gamma(alpha) * exp(-alpha(e^{gamma u} - 1 - gamma u)),
/// together with the variance sigma2 of its normal limit (reached as
/// alpha -> infinity with alpha gamma^2 = 1/sigma2 held fixed).
struct FergusonParams {
    double alpha;
    double gamma;
    double sigma2;
};

/// The density above, evaluated in log space; underflows to 0 far out.
double ferguson_density(const FergusonParams& params, double u);

/// sup over an equispaced grid on [-5, 5] of |q_{alpha,gamma}(u) - q_{sigma2}(u)|
/// where q_{sigma2} is the centered normal density with variance sigma2.
double ferguson_normal_gap(const FergusonParams& params, int grid_points = 2001);

/// max over the given samples of |q(theta_hat) - mean of g(x_i)|: zero (to
/// solver tolerance) exactly when the family's MLE is the g-moment estimator
/// through q, as in an exponential family with mean parametrization.
double linear_statistic_residual(const Family& fam,
                                 const std::function<double(double)>& q,
                                 const std::function<double(double)>& g,
                                 const std::vector<std::vector<double>>& samples);

struct SubsetBudget {
    std::size_t localization_evals = 10000;
    std::size_t pair_attempts = 1000;
};

struct ProductBox {
    std::vector<double> lo;
    std::vector<double> hi;
};

/// Two points whose 2^n mixed coordinate combinations all lie in the target
/// set; the product of the coordinate pairs is then a subset witness.
struct ProductWitness {
    std::vector<double> y1;
    std::vector<double> y2;
    ProductBox box;
    double box_freq;
    std::size_t indicator_evals;
};

/// Searches for a product subset of E: localizes a box B with empirical
/// P(E | B) above 1 - 2^{-(n+1)} by repeated midpoint halving (keeping the
/// better half, cycling through the axes), then rejection-samples point
/// pairs in B until all 2^n mixed vertices lie in E and every coordinate
/// pair is distinct.  Empty result when either budget runs out first; a
/// witness always exists for high-probability events, but the search is not
/// guaranteed to find one within budget.
std::optional<ProductWitness> find_product_subset(
    const std::function<bool(std::span<const double>)>& indicator,
    const std::vector<std::function<double(RandomStream&)>>& samplers,
    RandomStream& stream, const SubsetBudget& budget = {});

}  // namespace mlelab
