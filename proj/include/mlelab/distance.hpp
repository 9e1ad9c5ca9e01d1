#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlelab/family.hpp"

namespace mlelab {

/// Squared Hellinger distance and affinity between p_theta and p_theta0,
/// with the closed form alongside the quadrature value when the family has
/// one.  abs_gap is |h_closed - h_quad| when the closed form exists, else
/// |2(1 - J) - h_quad| (the identity J = 1 - H/2 checked against the
/// independent affinity integral).
struct HellingerReport {
    double theta;
    double theta0;
    std::optional<double> h_closed;
    double h_quad;
    double affinity_j;
    double abs_gap;
};

/// Closed-form squared Hellinger distance; NoClosedForm when the family has
/// no registered formula.
double hellinger_closed(const Family& fam, double theta, double theta0);

/// Integral (sum, for discrete families) of (sqrt(p_theta) - sqrt(p_theta0))^2.
double hellinger_quadrature(const Family& fam, double theta, double theta0,
                            const QuadratureSpec& spec = {});

/// Hellinger affinity J = integral of sqrt(p_theta p_theta0), computed
/// directly (not through H).
double affinity(const Family& fam, double theta, double theta0,
                const QuadratureSpec& spec = {});

HellingerReport hellinger_report(const Family& fam, double theta, double theta0,
                                 const QuadratureSpec& spec = {});

/// Verdict of one growth/decay condition on an explicit grid, reproducible
/// from the stored grid and constants.
struct ConditionVerdict {
    std::string condition;
    bool holds_on_grid;
    std::map<std::string, double> witness_constants;
    std::vector<double> grid;
};

/// Condition (D0): inf over a punctured grid in the neighborhood of
/// H(theta, theta0)/(theta - theta0)^2 is positive, and stays within a
/// factor 2 when the grid is doubled.  Distances are log-spaced from 1e-3 of
/// each side's half-width up to the side's half-width; points outside the
/// parameter space are dropped.
ConditionVerdict check_D0(const Family& fam, double theta0,
                          Interval neighborhood, int grid_size,
                          const QuadratureSpec& spec = {});

/// Condition (D1): sup over the far grid of J(theta, theta0)|theta-theta0|^gamma
/// stabilizes: the sup over the full grid exceeds the sup restricted to
/// |theta - theta0| <= max/10 by at most 1%.  A finite-grid stand-in for an
/// asymptotic bound, so necessarily a heuristic.
ConditionVerdict check_D1(const Family& fam, double theta0, double gamma,
                          std::span<const double> far_grid,
                          const QuadratureSpec& spec = {});

/// Condition (B): fisher_information(theta) <= c1 + c2 |theta - theta0|^alpha
/// at every grid point.
ConditionVerdict check_B(const Family& fam, double theta0, double c1, double c2,
                         double alpha, std::span<const double> grid,
                         const QuadratureSpec& spec = {});

/// Default far grid for check_D1: per unbounded side, 25 distances
/// log-spaced over [scale, 1e4 * scale] with scale = max(1, |theta0|); per
/// bounded side, 8 distances log-spaced up to 97% of the gap to the endpoint.
std::vector<double> default_far_grid(const Family& fam, double theta0);

/// min(alpha/2, alpha - 1); the affinity decay exponent a location family
/// with tail exponent alpha inherits.  DomainError for alpha <= 1.
double gamma_alpha(double alpha);

/// lambda(h) = E_theta0 sqrt(p_{theta0+h}/p_{theta0}), which equals the
/// affinity J(theta0 + h, theta0).  Requires the family's declared
/// log-concavity flag (the exponential remainder argument needs it).
double lambda_bound(const Family& fam, double theta0, double h,
                    const QuadratureSpec& spec = {});

/// 2 max(lambda_plus, lambda_minus)^n; DomainError unless both lie in [0,1).
double remainder_envelope(double lambda_plus, double lambda_minus,
                          std::size_t n);

/// Closed-form affinity for the example62 family (two normals with
/// theta-driven mean and variance); the general two-normal affinity, which
/// at theta0 = 0 reduces to sqrt(2 sigma/(sigma^2+1)) exp(-mu^2/(4 sigma^2 + 4)).
double affinity_example62(double theta, double theta0 = 0.0);

}  // namespace mlelab
