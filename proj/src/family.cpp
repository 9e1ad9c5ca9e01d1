#include "mlelab/family.hpp"

#include <algorithm>
#include <cmath>

#include "mlelab/errors.hpp"

namespace mlelab {

double Family::loglik_from_stats(const StatVec&, std::size_t, double) const {
    throw DomainError(name() + ": no sufficient-statistic reduction");
}

double Family::score_from_stats(const StatVec&, std::size_t, double) const {
    throw DomainError(name() + ": no sufficient-statistic reduction");
}

double Family::score_slope_from_stats(const StatVec&, std::size_t, double) const {
    throw DomainError(name() + ": no sufficient-statistic reduction");
}

namespace {

double discrete_expectation(const Family& fam, double theta,
                            const std::function<double(double)>& g,
                            const QuadratureSpec& spec) {
    // Sum pmf * g upward from the bottom of the support.  Once the pmf ratio
    // has dropped below 1/2 the terms decay geometrically, faster than any
    // polynomial growth in g, so the sum closes when the current term weighted
    // by the local magnitude of g can no longer move the result.
    const double tail_cut = spec.abs_tol / 10.0;
    const long start = long(std::ceil(fam.support().lo));
    const long hard_cap =
        start + long(std::ceil(theta + 200.0 * std::sqrt(theta + 1.0) + 200.0));
    double acc = 0.0;
    for (long x = start; x <= hard_cap; ++x) {
        const double p = std::exp(fam.log_density(double(x), theta));
        const double gx = g(double(x));
        acc += p * gx;
        if (double(x) >= theta && theta <= 0.5 * double(x + 1) &&
            4.0 * p * (1.0 + std::fabs(gx)) < tail_cut)
            return acc;
    }
    throw QuadratureFailure("expectation: discrete tail did not close");
}

}  // namespace

double expectation(const Family& fam, double theta,
                   const std::function<double(double)>& g,
                   const QuadratureSpec& spec) {
    if (!fam.param_space().contains(theta))
        throw DomainError(fam.name() + ": theta outside parameter space");
    if (fam.discrete()) return discrete_expectation(fam, theta, g, spec);
    const Interval sup = fam.support();
    const double bp = fam.typical_location(theta);
    const double cuts[] = {bp};
    return integrate(
               [&](double x) { return std::exp(fam.log_density(x, theta)) * g(x); },
               sup.lo, sup.hi, spec, cuts)
        .value;
}

double fisher_information(const Family& fam, double theta,
                          const QuadratureSpec& spec) {
    const double info = expectation(
        fam, theta,
        [&](double x) {
            const double s = fam.score_derivative(x, theta, 1);
            return s * s;
        },
        spec);
    if (!std::isfinite(info) || info <= 0.0)
        throw NonPositiveInformation(fam.name() + ": information not positive");
    return info;
}

double third_derivative_envelope(const Family& fam, double x, double theta0,
                                 double delta) {
    if (!(delta > 0.0)) throw DomainError("third_derivative_envelope: delta <= 0");
    const Interval ps = fam.param_space();
    const double lo = theta0 - delta;
    const double hi = theta0 + delta;
    if (!ps.contains(lo) || !ps.contains(hi))
        throw DomainError("third_derivative_envelope: interval leaves parameter space");
    if (auto exact = fam.envelope_sup(x, lo, hi)) return *exact;

    const auto value = [&](double t) {
        return std::fabs(fam.score_derivative(x, t, 3));
    };
    constexpr int kGrid = 101;
    double best = 0.0;
    int best_i = 0;
    for (int i = 0; i < kGrid; ++i) {
        const double t = lo + (hi - lo) * double(i) / double(kGrid - 1);
        const double v = value(t);
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    // Golden-section refinement of |d3| inside the best cell's neighbours.
    double a = lo + (hi - lo) * double(std::max(0, best_i - 1)) / double(kGrid - 1);
    double b = lo + (hi - lo) * double(std::min(kGrid - 1, best_i + 1)) / double(kGrid - 1);
    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = value(c);
    double fd = value(d);
    for (int it = 0; it < 60 && (b - a) > 1e-12 * (1.0 + std::fabs(theta0)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = value(d);
        }
        best = std::max(best, std::max(fc, fd));
    }
    return best * (1.0 + 1e-9);
}

std::vector<double> draw_sample(const Family& fam, double theta, std::size_t n,
                                RandomStream& stream) {
    if (!fam.param_space().contains(theta))
        throw DomainError(fam.name() + ": theta outside parameter space");
    std::vector<double> xs(n);
    for (auto& x : xs) x = fam.sample(theta, stream);
    return xs;
}

double default_delta(const Family& fam, double theta0, const QuadratureSpec& spec) {
    const Interval ps = fam.param_space();
    if (!ps.contains(theta0)) throw DomainError(fam.name() + ": theta0 outside parameter space");
    const double gap = std::min(theta0 - ps.lo, ps.hi - theta0);  // may be inf
    double delta = std::min(1.0, 0.5 * gap);
    const double e_u = expectation(
        fam, theta0, [&](double x) { return -fam.score_derivative(x, theta0, 2); }, spec);
    // The candidate switches inside the envelope leave corners in x, which
    // double-exponential rules resolve slowly; the 5% margin below only
    // needs a few digits.
    QuadratureSpec env_spec = spec;
    env_spec.abs_tol = std::max(env_spec.abs_tol, 1e-8);
    env_spec.rel_tol = std::max(env_spec.rel_tol, 1e-6);
    env_spec.max_level = std::max(env_spec.max_level, 14);
    for (int k = 0; k < 40; ++k) {
        const double e_r = expectation(
            fam, theta0,
            [&](double x) { return third_derivative_envelope(fam, x, theta0, delta); },
            env_spec);
        if (e_u - delta * e_r > 0.05 * e_u) return delta;
        delta *= 0.5;
    }
    throw DomainError(fam.name() + ": no admissible default delta found");
}

}  // namespace mlelab
