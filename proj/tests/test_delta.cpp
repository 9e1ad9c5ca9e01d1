#include <doctest.h>

#include <cmath>
#include <span>
#include <vector>

#include <mlelab/delta.hpp>
#include <mlelab/errors.hpp>
#include <mlelab/family.hpp>
#include <mlelab/mle.hpp>
#include <mlelab/rng.hpp>

using namespace mlelab;

TEST_SUITE("delta") {

TEST_CASE("context constants for the poisson reference point") {
    auto fam = make_family("poisson");
    const DeltaContext ctx = make_delta_context(*fam, 2.0, 0.5);
    CHECK(ctx.theta0 == 2.0);
    CHECK(ctx.delta == 0.5);
    CHECK(ctx.e_u == doctest::Approx(0.5).epsilon(1e-8));          // E X / th^2
    CHECK(ctx.e_rstar == doctest::Approx(4.0 / 3.375).epsilon(1e-6));
    CHECK(ctx.sigma_tilde == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    CHECK(ctx.epsilon > 0.0);

    // the smoothness ball stays inside the domain of the formula
    const double e = 0.999 * ctx.epsilon / std::sqrt(3.0);
    for (double s1 : {-1.0, 1.0})
        for (double s2 : {-1.0, 1.0})
            for (double s3 : {-1.0, 1.0})
                CHECK(in_domain(ctx, Vec3{s1 * e, s2 * e, s3 * e}));
}

TEST_CASE("maps vanish at the origin and linearize as x1 / e_u") {
    auto fam = make_family("poisson");
    const DeltaContext ctx = make_delta_context(*fam, 2.0, 0.5);
    CHECK(f_pm(ctx, +1, Vec3{0.0, 0.0, 0.0}) == 0.0);
    CHECK(f_pm(ctx, -1, Vec3{0.0, 0.0, 0.0}) == 0.0);
    CHECK(linear_part(ctx, Vec3{0.01, 0.5, -0.3}) ==
          doctest::Approx(0.02).epsilon(1e-12));

    // quadratic contact: |f - L| / |x|^2 stays bounded as x -> 0 along a
    // fixed direction, and the first-order term matches
    const Vec3 dir{0.6, -0.5, 0.4};
    double prev_ratio = 0.0;
    for (double t : {1e-2, 1e-3, 1e-4}) {
        const Vec3 x{t * dir[0], t * dir[1], t * dir[2]};
        for (int sign : {+1, -1}) {
            const double gap = std::fabs(f_pm(ctx, sign, x) - linear_part(ctx, x));
            const double ratio = gap / (t * t);
            CHECK(ratio < 10.0);
            prev_ratio = ratio;
        }
    }
    CHECK(prev_ratio > 0.0);
}

TEST_CASE("sign argument is validated") {
    auto fam = make_family("poisson");
    const DeltaContext ctx = make_delta_context(*fam, 2.0, 0.5);
    CHECK_THROWS_AS(f_pm(ctx, 0, Vec3{0.0, 0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(f_pm(ctx, 2, Vec3{0.0, 0.0, 0.0}), DomainError);
}

TEST_CASE("standardize scales deviations by sqrt(n) over sigma_tilde") {
    auto fam = make_family("poisson");
    DeltaContext ctx = make_delta_context(*fam, 2.0, 0.5);
    ctx.sigma_tilde = std::sqrt(2.0);
    CHECK(standardize(ctx, 16, 0.5) ==
          doctest::Approx(4.0 * 0.5 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(standardize(ctx, 1, 0.0) == 0.0);
}

TEST_CASE("maps at centered moments reproduce the bracket endpoints") {
    auto fam = make_family("exp_rate");
    const double th0 = 1.0, delta = 0.5;
    const DeltaContext ctx = make_delta_context(*fam, th0, delta);
    RandomStream s(2718);
    int inside = 0, outside = 0;
    for (int rep = 0; rep < 12; ++rep) {
        const auto xs = draw_sample(*fam, th0, 200, s);
        const Moments m = sample_moments(*fam, xs, th0, delta);
        const Bracket b = bracket_from_moments(m.z_bar, m.u_bar, m.rstar_bar);
        const Vec3 x{m.z_bar, m.u_bar - ctx.e_u, m.rstar_bar - ctx.e_rstar};
        if (b.plus_defined) {
            // on the joint domain both maps agree with the bracket endpoints
            CHECK(f_pm(ctx, +1, x) ==
                  doctest::Approx(b.t_plus).epsilon(1e-12));
            CHECK(b.minus_defined);
            CHECK(f_pm(ctx, -1, x) ==
                  doctest::Approx(b.t_minus).epsilon(1e-12));
            ++inside;
        } else {
            // off it both maps take the zero extension
            CHECK(f_pm(ctx, +1, x) == 0.0);
            CHECK(f_pm(ctx, -1, x) == 0.0);
            ++outside;
        }
    }
    CHECK(inside >= 1);
    CHECK(outside >= 1);
}

TEST_CASE("curvature estimate for the worked scalar example") {
    // f(x) = x / (1 + |x|) has sup |f''| = 2, approached at the origin
    auto f = [](std::span<const double> x) { return x[0] / (1.0 + std::fabs(x[0])); };
    const double m = estimate_m_star(f, 1, 0.5);
    CHECK(m == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("curvature estimate is exact for quadratics") {
    auto f = [](std::span<const double> x) { return x[0] * x[0]; };
    CHECK(estimate_m_star(f, 1, 1.0) == doctest::Approx(2.0).epsilon(1e-6));

    // dim 3: f = x1^2 + x2 x3 has max ray curvature 2 along e1
    auto g = [](std::span<const double> x) {
        return x[0] * x[0] + x[1] * x[2];
    };
    const double m = estimate_m_star(g, 3, 1.0);
    CHECK(m > 1.85);
    CHECK(m < 2.01);
}

TEST_CASE("curvature estimator validates its inputs") {
    auto f = [](std::span<const double> x) { return x[0]; };
    CHECK_THROWS_AS(estimate_m_star(f, 2, 1.0), DomainError);
    CHECK_THROWS_AS(estimate_m_star(f, 1, 0.0), DomainError);
    CHECK_THROWS_AS(estimate_m_star(f, 1, 1.0, 0), DomainError);
}

}  // TEST_SUITE
