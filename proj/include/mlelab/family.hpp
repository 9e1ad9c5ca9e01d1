#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlelab/quadrature.hpp"
#include "mlelab/rng.hpp"

namespace mlelab {

/// Open interval (lo, hi); endpoints may be infinite.
struct Interval {
    double lo;
    double hi;
    bool contains(double x) const { return x > lo && x < hi; }
};

/// Fixed-size accumulator for a family's sufficient statistics.
struct StatVec {
    std::array<double, 4> v{0.0, 0.0, 0.0, 0.0};
};

/// A one-parameter family of densities p(x; theta) with respect to Lebesgue
/// or counting measure.  Everything the estimation, bracketing, distance and
/// Monte Carlo layers need is expressed through this interface.
class Family {
  public:
    virtual ~Family() = default;

    virtual const std::string& name() const = 0;
    virtual std::string describe() const = 0;

    /// Open parameter space.
    virtual Interval param_space() const = 0;

    /// Support of the densities (shared across theta).  For a discrete
    /// family the support is the integers >= lo.
    virtual Interval support() const = 0;

    virtual bool discrete() const { return false; }

    /// Whether log p(x; theta) is concave in theta for every x.
    virtual bool log_concave_in_theta() const = 0;

    virtual double log_density(double x, double theta) const = 0;

    /// d^order/dtheta^order log p(x; theta), order in {1, 2, 3}.
    virtual double score_derivative(double x, double theta, int order) const = 0;

    /// Exact sup over theta in [lo, hi] of |third derivative|, when the
    /// family can supply it analytically; nullopt falls back to the generic
    /// grid-plus-refinement search.
    virtual std::optional<double> envelope_sup(double /*x*/, double /*lo*/,
                                              double /*hi*/) const {
        return std::nullopt;
    }

    /// True when the third derivative does not depend on x (the envelope is
    /// then computed once per interval, not once per observation).
    virtual bool envelope_x_free() const { return false; }

    virtual double sample(double theta, RandomStream& stream) const = 0;

    /// Where the density concentrates (mean or mode); used to place
    /// quadrature breakpoints.
    virtual double typical_location(double theta) const = 0;

    /// True for parameter spaces bounded below at 0, where scanning is done
    /// in log(theta).
    virtual bool positive_scale() const { return param_space().lo >= 0.0; }

    /// Initial solver window believed to contain the interesting score
    /// roots for this sample; the solver expands it when the evidence says
    /// the maximizer lies outside.
    virtual std::pair<double, double> scan_window(std::span<const double> xs) const = 0;

    /// Optional sufficient-statistic fast path: one O(n) reduction pass,
    /// then likelihood/score evaluations in O(1) per theta.
    virtual bool has_stat_reduction() const { return false; }
    virtual StatVec reduce(std::span<const double> /*xs*/) const { return {}; }
    virtual double loglik_from_stats(const StatVec&, std::size_t, double) const;
    virtual double score_from_stats(const StatVec&, std::size_t, double) const;
    virtual double score_slope_from_stats(const StatVec&, std::size_t, double) const;

    /// Squared Hellinger distance in closed form, for families that have one.
    virtual std::optional<double> hellinger_closed_form(double /*theta*/,
                                                       double /*theta0*/) const {
        return std::nullopt;
    }
};

/// E_theta[g(X)] by double-exponential quadrature (continuous families) or
/// tail-bounded summation (discrete families).
double expectation(const Family& fam, double theta,
                   const std::function<double(double)>& g,
                   const QuadratureSpec& spec = {});

/// Fisher information E_theta[(d/dtheta log p)^2].  Throws
/// NonPositiveInformation when the value is not strictly positive and finite.
double fisher_information(const Family& fam, double theta,
                          const QuadratureSpec& spec = {});

/// sup over theta in [theta0 - delta, theta0 + delta] of
/// |d^3/dtheta^3 log p(x; theta)|.  Uses the family's analytic form when
/// available; otherwise a 101-point grid with golden-section refinement of
/// the best cell, inflated by a relative 1e-9 so the result is a true upper
/// envelope of the grid search.
double third_derivative_envelope(const Family& fam, double x, double theta0,
                                 double delta);

/// n i.i.d. draws.
std::vector<double> draw_sample(const Family& fam, double theta, std::size_t n,
                                RandomStream& stream);

/// Largest delta of the form min(1, boundary_gap/2) / 2^k satisfying
/// E[U - delta R*] > 0 with a 5% margin (U = -l'', R* the third-derivative
/// envelope at that delta).  Throws DomainError when no such delta exists
/// within 40 halvings.
double default_delta(const Family& fam, double theta0,
                     const QuadratureSpec& spec = {});

/// Construct a built-in family by registry id.  Unknown ids or parameter
/// names throw ConfigError; invalid parameter values throw DomainError.
std::unique_ptr<Family> make_family(const std::string& id,
                                    const std::map<std::string, double>& params = {});

/// All registry ids, sorted.
std::vector<std::string> family_ids();

}  // namespace mlelab
