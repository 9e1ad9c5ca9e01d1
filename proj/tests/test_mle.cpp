#include <doctest.h>

#include <cmath>
#include <vector>

#include <mlelab/delta.hpp>
#include <mlelab/errors.hpp>
#include <mlelab/family.hpp>
#include <mlelab/mle.hpp>

using namespace mlelab;

namespace {

// independent maximizer: coarse scan plus golden-section refinement of the
// best cell
double grid_argmax(const Family& fam, const std::vector<double>& xs, double lo,
                   double hi, int points) {
    auto ll = [&](double th) {
        double s = 0.0;
        for (double x : xs) s += fam.log_density(x, th);
        return s;
    };
    double best = lo, best_v = ll(lo);
    for (int i = 1; i <= points; ++i) {
        const double th = lo + (hi - lo) * double(i) / double(points);
        const double v = ll(th);
        if (v > best_v) {
            best_v = v;
            best = th;
        }
    }
    double a = std::max(lo, best - (hi - lo) / points);
    double b = std::min(hi, best + (hi - lo) / points);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = ll(c), fd = ll(d);
    for (int it = 0; it < 200; ++it) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = ll(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = ll(c);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST_SUITE("mle") {

TEST_CASE("closed form maximizers") {
    auto normal = make_family("normal_location");
    const std::vector<double> xs{1.0, 2.0, 3.0};
    auto r = solve_mle(*normal, xs);
    CHECK(r.converged);
    CHECK(!r.at_boundary);
    CHECK(r.theta_hat == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::fabs(r.score) < 1e-8);

    auto exp = make_family("exp_rate");
    const std::vector<double> ys{2.0, 2.0};
    r = solve_mle(*exp, ys);
    CHECK(r.theta_hat == doctest::Approx(0.5).epsilon(1e-9));

    auto gamma_rate = make_family("gamma_rate");  // alpha = 3
    const std::vector<double> zs{1.0, 2.0, 3.0};
    r = solve_mle(*gamma_rate, zs);
    CHECK(r.theta_hat == doctest::Approx(1.5).epsilon(1e-9));

    auto weibull = make_family("weibull_scale");  // k = 2
    const std::vector<double> ws{1.0, 2.0};
    r = solve_mle(*weibull, ws);
    CHECK(r.theta_hat == doctest::Approx(std::sqrt(2.5)).epsilon(1e-9));

    auto single = solve_mle(*normal, std::vector<double>{100.0});
    CHECK(single.theta_hat == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("cauchy solver agrees with an independent grid search") {
    auto fam = make_family("cauchy_location");
    const std::vector<double> xs{-1.0, 0.0, 1.0, 10.0};
    auto r = solve_mle(*fam, xs);
    CHECK(r.converged);
    const double oracle = grid_argmax(*fam, xs, -5.0, 12.0, 20000);
    CHECK(r.theta_hat == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(std::fabs(r.score) < 1e-7);

    // multimodal-prone sample: solver must find the global mode
    const std::vector<double> far{-5.1, -4.9, 4.8, 5.2, 5.0};
    r = solve_mle(*fam, far);
    const double oracle2 = grid_argmax(*fam, far, -10.0, 10.0, 40000);
    CHECK(r.theta_hat == doctest::Approx(oracle2).epsilon(1e-6));
    double ll_hat = 0.0, ll_orc = 0.0;
    for (double x : far) {
        ll_hat += fam->log_density(x, r.theta_hat);
        ll_orc += fam->log_density(x, oracle2);
    }
    CHECK(ll_hat >= ll_orc - 1e-9);
}

TEST_CASE("beta_mean solver agrees with an independent grid search") {
    auto fam = make_family("beta_mean");
    RandomStream s(4242);
    const auto xs = draw_sample(*fam, 0.35, 40, s);
    auto r = solve_mle(*fam, xs);
    CHECK(r.converged);
    const double oracle = grid_argmax(*fam, xs, 0.02, 0.98, 20000);
    CHECK(r.theta_hat == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("boundary supremum is reported, not returned as a number") {
    auto fam = make_family("poisson");
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    auto r = solve_mle(*fam, zeros);
    CHECK(r.at_boundary);
    CHECK(!r.converged);
    CHECK(r.side == -1);
    CHECK(std::isnan(r.theta_hat));
}

TEST_CASE("solver input validation") {
    auto fam = make_family("normal_location");
    CHECK_THROWS_AS(solve_mle(*fam, std::vector<double>{}), DomainError);
    SolveOptions opt;
    opt.scan_points = 4;
    CHECK_THROWS_AS(solve_mle(*fam, std::vector<double>{1.0}, opt), DomainError);
}

TEST_CASE("sample moments of a poisson fixture") {
    auto fam = make_family("poisson");
    const std::vector<double> xs{4.0, 4.0};
    const Moments m = sample_moments(*fam, xs, 2.0, 0.5);
    CHECK(m.z_bar == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.u_bar == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.rstar_bar == doctest::Approx(8.0 / 3.375).epsilon(1e-9));
    CHECK_THROWS_AS(sample_moments(*fam, std::vector<double>{}, 2.0, 0.5),
                    DomainError);
}

TEST_CASE("bracket endpoints match the quadratic roots and the abstract map") {
    const double z = 0.05, u = 0.6, rs = 2.5;
    const Bracket b = bracket_from_moments(z, u, rs);
    CHECK(b.plus_defined);
    CHECK(b.minus_defined);
    CHECK(b.disc_plus == doctest::Approx(0.36 - 0.25).epsilon(1e-14));
    CHECK(b.disc_minus == doctest::Approx(0.36 + 0.25).epsilon(1e-14));
    CHECK(b.t_plus ==
          doctest::Approx(0.1 / (0.6 + std::sqrt(0.11))).epsilon(1e-13));
    CHECK(b.t_minus ==
          doctest::Approx(0.1 / (0.6 + std::sqrt(0.61))).epsilon(1e-13));

    // the same endpoints through the abstract maps f_pm with centering
    // constants e_u = 0.5, e_rstar = 2.0
    DeltaContext ctx{};
    ctx.e_u = 0.5;
    ctx.e_rstar = 2.0;
    ctx.sigma_tilde = 1.0;
    ctx.epsilon = 1.0;
    const Vec3 x{z, u - ctx.e_u, rs - ctx.e_rstar};
    CHECK(f_pm(ctx, +1, x) == doctest::Approx(b.t_plus).epsilon(1e-13));
    CHECK(f_pm(ctx, -1, x) == doctest::Approx(b.t_minus).epsilon(1e-13));
}

TEST_CASE("bracket undefined outside the quadratic domain") {
    const Bracket b = bracket_from_moments(0.3, 0.6, 2.5);
    CHECK(!b.plus_defined);   // disc = 0.36 - 1.5 < 0
    CHECK(b.minus_defined);

    DeltaContext ctx{};
    ctx.e_u = 0.5;
    ctx.e_rstar = 2.0;
    ctx.sigma_tilde = 1.0;
    ctx.epsilon = 1.0;
    const Vec3 x{0.3, 0.1, 0.5};
    CHECK(!in_domain(ctx, x));
    CHECK(f_pm(ctx, +1, x) == 0.0);

    const Bracket c = bracket_from_moments(0.0, -0.2, 1.0);
    CHECK(!c.plus_defined);  // nonpositive denominator
}

TEST_CASE("bracket stats classify the exceptional sets") {
    auto fam = make_family("poisson");

    auto bs = bracket_stats(*fam, std::vector<double>{4.0, 4.0}, 2.0, 0.5);
    CHECK(bs.in_b2);  // u^2 = 1 <= 2 |z| rstar = 4.74
    CHECK(!bs.eligible);

    bs = bracket_stats(*fam, std::vector<double>{2.0, 2.0}, 2.0, 0.5);
    CHECK(bs.in_good_event);  // theta_hat = 2 = theta0
    CHECK(!bs.in_b1);
    CHECK(bs.mle.theta_hat == doctest::Approx(2.0).epsilon(1e-9));
    if (bs.eligible) {
        CHECK(bs.bracket_lo <= 1e-12);
        CHECK(bs.bracket_hi >= -1e-12);
    }
}

TEST_CASE("eligible replicates never escape the bracket") {
    for (const char* id : {"poisson", "normal_location"}) {
        CAPTURE(id);
        auto fam = make_family(id);
        const double th0 = id[0] == 'p' ? 2.0 : 0.0;
        const EventRates er = event_rates(*fam, th0, 0.5, 30, 500, 7);
        CHECK(er.replications == 500);
        CHECK(er.violation_count == 0);
        CHECK(er.p_good.p_hat > 0.9);
        CHECK(er.boundary_count == 0);
        // deterministic under the same seed
        const EventRates er2 = event_rates(*fam, th0, 0.5, 30, 500, 7);
        CHECK(er2.p_good.p_hat == er.p_good.p_hat);
        CHECK(er2.p_b2.p_hat == er.p_b2.p_hat);
    }
    auto fam = make_family("poisson");
    CHECK_THROWS_AS(event_rates(*fam, 2.0, 0.5, 30, 0, 7), DomainError);
}

}  // TEST_SUITE
