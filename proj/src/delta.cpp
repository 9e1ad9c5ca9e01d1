#include "mlelab/delta.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlelab/errors.hpp"

namespace mlelab {

namespace {

bool margins_hold(const DeltaContext& ctx, const Vec3& x) {
    const double q = x[1] + ctx.e_u;
    if (!(q >= 0.1 * ctx.e_u)) return false;
    const double rhs = 2.0 * std::fabs(x[0]) * std::fabs(x[2] + ctx.e_rstar);
    return q * q >= 1.1 * rhs;
}

}  // namespace

DeltaContext make_delta_context(const Family& fam, double theta0, double delta,
                                const QuadratureSpec& spec) {
    DeltaContext ctx;
    ctx.theta0 = theta0;
    ctx.delta = delta;
    ctx.e_u = expectation(
        fam, theta0, [&](double x) { return -fam.score_derivative(x, theta0, 2); },
        spec);
    if (!(ctx.e_u > 0.0))
        throw DomainError("make_delta_context: E U_1 must be positive");
    // Corners from the envelope's candidate switches slow the quadrature;
    // a relative 1e-6 on E R*_1 is far below the smoothness margins it feeds.
    QuadratureSpec env_spec = spec;
    env_spec.abs_tol = std::max(env_spec.abs_tol, 1e-8);
    env_spec.rel_tol = std::max(env_spec.rel_tol, 1e-6);
    env_spec.max_level = std::max(env_spec.max_level, 14);
    ctx.e_rstar = expectation(
        fam, theta0,
        [&](double x) { return third_derivative_envelope(fam, x, theta0, delta); },
        env_spec);
    ctx.sigma_tilde = 1.0 / std::sqrt(fisher_information(fam, theta0, spec));

    // Shrink the ball until every probe direction keeps both domain margins.
    double eps = 1.0;
    bool found = false;
    for (int halving = 0; halving <= 60 && !found; ++halving, eps *= 0.5) {
        bool ok = true;
        for (int a = -1; a <= 1 && ok; ++a)
            for (int b = -1; b <= 1 && ok; ++b)
                for (int c = -1; c <= 1 && ok; ++c) {
                    if (a == 0 && b == 0 && c == 0) continue;
                    const double norm =
                        std::sqrt(double(a * a + b * b + c * c));
                    for (double frac : {0.25, 0.5, 0.75, 1.0}) {
                        const double r = frac * eps;
                        const Vec3 x{r * a / norm, r * b / norm, r * c / norm};
                        if (!margins_hold(ctx, x)) {
                            ok = false;
                            break;
                        }
                    }
                }
        if (ok) found = true;
    }
    if (!found)
        throw DomainError("make_delta_context: no admissible smoothness ball");
    ctx.epsilon = eps * 2.0;  // undo the loop's trailing halving
    return ctx;
}

bool in_domain(const DeltaContext& ctx, const Vec3& x) {
    const double q = x[1] + ctx.e_u;
    if (!(q > 0.0)) return false;
    return q * q > 2.0 * std::fabs(x[0]) * std::fabs(x[2] + ctx.e_rstar);
}

double f_pm(const DeltaContext& ctx, int sign, const Vec3& x) {
    if (sign != 1 && sign != -1) throw DomainError("f_pm: sign must be +-1");
    if (!in_domain(ctx, x)) return 0.0;
    const double q = x[1] + ctx.e_u;
    const double cross = 2.0 * std::fabs(x[0]) * std::fabs(x[2] + ctx.e_rstar);
    const double inner = q * q - double(sign) * cross;
    const double den = q + std::sqrt(inner);
    return 2.0 * x[0] / den;
}

double linear_part(const DeltaContext& ctx, const Vec3& x) {
    return x[0] / ctx.e_u;
}

double standardize(const DeltaContext& ctx, std::size_t n, double deviation) {
    return std::sqrt(double(n)) * deviation / ctx.sigma_tilde;
}

double estimate_m_star(const std::function<double(std::span<const double>)>& f,
                       int dim, double radius, int directions, int radii) {
    if (dim != 1 && dim != 3)
        throw DomainError("estimate_m_star: dimension must be 1 or 3");
    if (!(radius > 0.0)) throw DomainError("estimate_m_star: radius must be > 0");
    if (directions < 2 || radii < 2)
        throw DomainError("estimate_m_star: too few probes");

    std::vector<std::vector<double>> dirs;
    if (dim == 1) {
        dirs = {{1.0}, {-1.0}};
    } else {
        dirs.reserve(directions);
        const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < directions; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / directions;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = golden_angle * i;
            dirs.push_back({rho * std::cos(a), rho * std::sin(a), z});
        }
    }

    const double h = 1e-4;
    double sup = 0.0;
    std::vector<double> probe(dim);
    auto eval_scaled = [&](const std::vector<double>& base, double scale) {
        for (int k = 0; k < dim; ++k) probe[k] = base[k] * scale;
        return f(std::span<const double>(probe));
    };

    for (const auto& u : dirs) {
        for (int j = 0; j < radii; ++j) {
            const double r =
                radius * std::pow(10.0, -3.0 + 3.0 * double(j) / double(radii - 1));
            std::vector<double> base(dim);
            for (int k = 0; k < dim; ++k) base[k] = r * u[k];
            const double f0 = eval_scaled(base, 1.0);
            auto second = [&](double step) {
                const double fp = eval_scaled(base, 1.0 + step);
                const double fm = eval_scaled(base, 1.0 - step);
                return (fp - 2.0 * f0 + fm) / (step * step * r * r);
            };
            const double coarse = second(h);
            const double fine = second(0.5 * h);
            const double rich = (4.0 * fine - coarse) / 3.0;
            sup = std::max(sup, std::fabs(rich));
        }
    }
    return sup;
}

}  // namespace mlelab
