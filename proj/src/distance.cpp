#include "mlelab/distance.hpp"

#include <algorithm>
#include <cmath>

#include "mlelab/errors.hpp"

namespace mlelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double v, double hi) { return std::max(0.0, std::min(hi, v)); }

// Sum f(sqrt(p_k), sqrt(q_k)) over the integer support until both
// distributions have closed their mass.
template <class F>
double discrete_pair_sum(const Family& fam, double theta, double theta0, F f) {
    const long start = std::lround(std::ceil(fam.support().lo));
    const double reach = std::max(theta, theta0);
    const long cap =
        start + long(reach + 200.0 * std::sqrt(reach + 1.0) + 200.0);
    double total = 0.0, mass_p = 0.0, mass_q = 0.0;
    for (long k = start; k <= cap; ++k) {
        const double p = std::exp(fam.log_density(double(k), theta));
        const double q = std::exp(fam.log_density(double(k), theta0));
        mass_p += p;
        mass_q += q;
        total += f(std::sqrt(p), std::sqrt(q));
        if (double(k) >= reach && 1.0 - mass_p < 1e-13 && 1.0 - mass_q < 1e-13)
            return total;
    }
    throw QuadratureFailure("discrete_pair_sum: mass did not close");
}

template <class F>
double continuous_pair_integral(const Family& fam, double theta, double theta0,
                                F f, const QuadratureSpec& spec) {
    const Interval sup = fam.support();
    std::vector<double> brk{fam.typical_location(theta),
                            fam.typical_location(theta0)};
    auto integrand = [&](double x) {
        const double sp = std::exp(0.5 * fam.log_density(x, theta));
        const double sq = std::exp(0.5 * fam.log_density(x, theta0));
        return f(sp, sq);
    };
    return integrate(integrand, sup.lo, sup.hi, spec, brk).value;
}

template <class F>
double pair_functional(const Family& fam, double theta, double theta0, F f,
                       const QuadratureSpec& spec) {
    if (!fam.param_space().contains(theta) || !fam.param_space().contains(theta0))
        throw DomainError(fam.name() + ": parameter outside the family's space");
    if (fam.discrete()) return discrete_pair_sum(fam, theta, theta0, f);
    return continuous_pair_integral(fam, theta, theta0, f, spec);
}

double affinity_for_checks(const Family& fam, double theta, double theta0,
                           const QuadratureSpec& spec) {
    if (auto h = fam.hellinger_closed_form(theta, theta0))
        return clamp01(1.0 - 0.5 * *h, 1.0);
    return clamp01(affinity(fam, theta, theta0, spec), 1.0);
}

double hellinger_for_checks(const Family& fam, double theta, double theta0,
                            const QuadratureSpec& spec) {
    if (auto h = fam.hellinger_closed_form(theta, theta0))
        return clamp01(*h, 2.0);
    return hellinger_quadrature(fam, theta, theta0, spec);
}

}  // namespace

double hellinger_closed(const Family& fam, double theta, double theta0) {
    if (!fam.param_space().contains(theta) || !fam.param_space().contains(theta0))
        throw DomainError(fam.name() + ": parameter outside the family's space");
    const auto h = fam.hellinger_closed_form(theta, theta0);
    if (!h)
        throw NoClosedForm(fam.name() + ": no closed-form Hellinger distance");
    return clamp01(*h, 2.0);
}

double hellinger_quadrature(const Family& fam, double theta, double theta0,
                            const QuadratureSpec& spec) {
    const double v = pair_functional(
        fam, theta, theta0,
        [](double sp, double sq) { return (sp - sq) * (sp - sq); }, spec);
    return clamp01(v, 2.0);
}

double affinity(const Family& fam, double theta, double theta0,
                const QuadratureSpec& spec) {
    const double v = pair_functional(
        fam, theta, theta0, [](double sp, double sq) { return sp * sq; }, spec);
    return clamp01(v, 1.0);
}

HellingerReport hellinger_report(const Family& fam, double theta, double theta0,
                                 const QuadratureSpec& spec) {
    HellingerReport r;
    r.theta = theta;
    r.theta0 = theta0;
    r.h_quad = hellinger_quadrature(fam, theta, theta0, spec);
    r.affinity_j = affinity(fam, theta, theta0, spec);
    if (!fam.param_space().contains(theta) || !fam.param_space().contains(theta0))
        throw DomainError(fam.name() + ": parameter outside the family's space");
    if (auto h = fam.hellinger_closed_form(theta, theta0)) {
        r.h_closed = clamp01(*h, 2.0);
        r.abs_gap = std::fabs(*r.h_closed - r.h_quad);
    } else {
        r.h_closed = std::nullopt;
        r.abs_gap = std::fabs(2.0 * (1.0 - r.affinity_j) - r.h_quad);
    }
    return r;
}

ConditionVerdict check_D0(const Family& fam, double theta0,
                          Interval neighborhood, int grid_size,
                          const QuadratureSpec& spec) {
    if (grid_size < 2)
        throw InsufficientGrid("check_D0: need at least 2 grid points per side");
    if (!(neighborhood.lo < theta0 && theta0 < neighborhood.hi))
        throw DomainError("check_D0: theta0 must be interior to the neighborhood");

    const Interval space = fam.param_space();
    auto ratios_on = [&](int points) {
        std::vector<std::pair<double, double>> out;  // (theta, ratio)
        for (int side = -1; side <= 1; side += 2) {
            const double width = side < 0 ? theta0 - neighborhood.lo
                                          : neighborhood.hi - theta0;
            for (int i = 0; i < points; ++i) {
                const double frac =
                    std::pow(10.0, -3.0 + 3.0 * double(i) / double(points - 1));
                const double d = width * frac;
                const double th = theta0 + side * d;
                if (!space.contains(th)) continue;
                const double h = hellinger_for_checks(fam, th, theta0, spec);
                out.emplace_back(th, h / (d * d));
            }
        }
        return out;
    };

    const auto coarse = ratios_on(grid_size);
    const auto fine = ratios_on(2 * grid_size);
    if (coarse.size() < 2)
        throw InsufficientGrid("check_D0: neighborhood leaves too few admissible points");

    auto inf_of = [](const std::vector<std::pair<double, double>>& v) {
        auto it = std::min_element(
            v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
        return *it;
    };
    const auto [th_w, inf_c] = inf_of(coarse);
    const auto [th_f, inf_f] = inf_of(fine);

    ConditionVerdict v;
    v.condition = "D0";
    v.holds_on_grid = inf_c > 0.0 && inf_f > 0.0 && inf_f >= 0.5 * inf_c;
    v.witness_constants = {{"ratio_inf", inf_c},
                           {"ratio_inf_refined", inf_f},
                           {"witness_theta", th_w}};
    v.grid.reserve(coarse.size());
    for (const auto& [th, ratio] : coarse) v.grid.push_back(th);
    return v;
}

ConditionVerdict check_D1(const Family& fam, double theta0, double gamma,
                          std::span<const double> far_grid,
                          const QuadratureSpec& spec) {
    if (!(gamma > 0.0)) throw DomainError("check_D1: gamma must be > 0");
    if (far_grid.size() < 8)
        throw InsufficientGrid("check_D1: need at least 8 far-grid points");

    std::vector<double> sorted(far_grid.begin(), far_grid.end());
    std::sort(sorted.begin(), sorted.end(), [&](double a, double b) {
        return std::fabs(a - theta0) < std::fabs(b - theta0);
    });
    const double d_max = std::fabs(sorted.back() - theta0);

    double sup_all = 0.0, sup_inner = 0.0, witness = sorted.front();
    for (double th : sorted) {
        const double d = std::fabs(th - theta0);
        if (!(d > 0.0)) throw DomainError("check_D1: far grid touches theta0");
        const double j = affinity_for_checks(fam, th, theta0, spec);
        const double val = j * std::pow(d, gamma);
        if (val > sup_all) {
            sup_all = val;
            witness = th;
        }
        if (d <= d_max / 10.0) sup_inner = std::max(sup_inner, val);
    }

    ConditionVerdict v;
    v.condition = "D1";
    v.holds_on_grid = sup_inner > 0.0 && sup_all <= 1.01 * sup_inner;
    v.witness_constants = {{"gamma", gamma},
                           {"sup", sup_all},
                           {"sup_inner_decade", sup_inner},
                           {"witness_theta", witness}};
    v.grid = sorted;
    return v;
}

ConditionVerdict check_B(const Family& fam, double theta0, double c1, double c2,
                         double alpha, std::span<const double> grid,
                         const QuadratureSpec& spec) {
    if (!(c1 > 0.0 && c2 > 0.0 && alpha > 0.0))
        throw DomainError("check_B: constants must be positive");
    if (grid.empty()) throw InsufficientGrid("check_B: empty grid");

    bool holds = true;
    double worst_excess = -kInf;
    double witness = grid.front();
    for (double th : grid) {
        const double info = fisher_information(fam, th, spec);
        const double bound =
            c1 + c2 * std::pow(std::fabs(th - theta0), alpha);
        const double excess = info - bound;
        if (excess > worst_excess) {
            worst_excess = excess;
            witness = th;
        }
        if (excess > 1e-9 * bound) holds = false;
    }

    ConditionVerdict v;
    v.condition = "B";
    v.holds_on_grid = holds;
    v.witness_constants = {{"c1", c1},
                           {"c2", c2},
                           {"alpha", alpha},
                           {"worst_excess", worst_excess},
                           {"witness_theta", witness}};
    v.grid.assign(grid.begin(), grid.end());
    return v;
}

std::vector<double> default_far_grid(const Family& fam, double theta0) {
    const Interval space = fam.param_space();
    const double scale = std::max(1.0, std::fabs(theta0));
    std::vector<double> grid;
    for (int side = -1; side <= 1; side += 2) {
        const double edge = side < 0 ? space.lo : space.hi;
        if (std::isinf(edge)) {
            for (int i = 0; i < 25; ++i) {
                const double d =
                    scale * std::pow(10.0, 4.0 * double(i) / 24.0);
                grid.push_back(theta0 + side * d);
            }
        } else {
            const double gap = std::fabs(edge - theta0);
            for (int i = 0; i < 8; ++i) {
                const double d =
                    0.97 * gap * std::pow(10.0, -1.5 + 1.5 * double(i) / 7.0);
                const double th = theta0 + side * d;
                if (space.contains(th)) grid.push_back(th);
            }
        }
    }
    return grid;
}

double gamma_alpha(double alpha) {
    if (!(alpha > 1.0)) throw DomainError("gamma_alpha: requires alpha > 1");
    return std::min(alpha / 2.0, alpha - 1.0);
}

double lambda_bound(const Family& fam, double theta0, double h,
                    const QuadratureSpec& spec) {
    if (!fam.log_concave_in_theta())
        throw DomainError(
            "lambda_bound: family must declare log-concavity in theta");
    const double th = theta0 + h;
    if (!fam.param_space().contains(th))
        throw DomainError("lambda_bound: theta0 + h outside the parameter space");
    return affinity(fam, th, theta0, spec);
}

double remainder_envelope(double lambda_plus, double lambda_minus,
                          std::size_t n) {
    auto valid = [](double l) { return l >= 0.0 && l < 1.0; };
    if (!valid(lambda_plus) || !valid(lambda_minus))
        throw DomainError("remainder_envelope: lambdas must lie in [0, 1)");
    return 2.0 * std::pow(std::max(lambda_plus, lambda_minus), double(n));
}

double affinity_example62(double theta, double theta0) {
    if (!(theta > -1.0) || !(theta0 > -1.0))
        throw DomainError("affinity_example62: parameters must exceed -1");
    auto moments = [](double th, double& m, double& v) {
        m = th / (1.0 + th * th);
        v = ((1.0 + th) * (1.0 + th) * (1.0 + th) - th) / (1.0 + th * th * th);
    };
    double m1, v1, m2, v2;
    moments(theta, m1, v1);
    moments(theta0, m2, v2);
    const double dm = m1 - m2;
    const double log_aff =
        0.5 * (std::log(2.0) + 0.5 * (std::log(v1) + std::log(v2)) -
               std::log(v1 + v2)) -
        dm * dm / (4.0 * (v1 + v2));
    return std::exp(std::min(log_aff, 0.0));
}

}  // namespace mlelab
