#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <mlelab/appendix.hpp>
#include <mlelab/errors.hpp>
#include <mlelab/family.hpp>
#include <mlelab/quadrature.hpp>
#include <mlelab/rng.hpp>
#include <mlelab/special.hpp>

using namespace mlelab;

namespace {

bool vertices_in(const std::function<bool(std::span<const double>)>& ind,
                 const ProductWitness& w) {
    const std::size_t n = w.y1.size();
    std::vector<double> v(n);
    for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
        for (std::size_t k = 0; k < n; ++k)
            v[k] = (mask >> k) & 1 ? w.y2[k] : w.y1[k];
        if (!ind(v)) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("appendix") {

TEST_CASE("ferguson density value, validation and normalization") {
    FergusonParams p{2.0, 0.5, 1.0};
    // q(0) = |gamma| alpha^alpha e^{-alpha} / Gamma(alpha)
    const double at0 = 0.5 * std::exp(2.0 * (std::log(2.0) - 1.0) - log_gamma(2.0));
    CHECK(ferguson_density(p, 0.0) == doctest::Approx(at0).epsilon(1e-13));
    CHECK(ferguson_density(p, -300.0) >= 0.0);
    CHECK(std::isfinite(ferguson_density(p, 300.0)));

    FergusonParams bad{0.0, 0.5, 1.0};
    CHECK_THROWS_AS(ferguson_density(bad, 0.0), DomainError);
    bad = {2.0, 0.0, 1.0};
    CHECK_THROWS_AS(ferguson_density(bad, 0.0), DomainError);

    FergusonParams mid{50.0, 0.2, 1.0};
    const auto r = integrate([&](double u) { return ferguson_density(mid, u); },
                             -std::numeric_limits<double>::infinity(),
                             std::numeric_limits<double>::infinity(), {},
                             std::vector<double>{0.0});
    CHECK(std::fabs(r.value - 1.0) <= 1e-8);
}

TEST_CASE("gap to the normal limit shrinks along alpha gamma^2 = 1") {
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {1e2, 1e3, 1e4}) {
        const double gamma = 1.0 / std::sqrt(alpha);
        FergusonParams p{alpha, gamma, 1.0};
        const double gap = ferguson_normal_gap(p);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev <= 0.01);

    FergusonParams p{100.0, 0.1, 1.0};
    CHECK_THROWS_AS(ferguson_normal_gap(p, 1), DomainError);
    FergusonParams badv{100.0, 0.1, 0.0};
    CHECK_THROWS_AS(ferguson_normal_gap(badv), DomainError);
}

TEST_CASE("moment-map residual vanishes for mean parametrizations") {
    RandomStream s(606);
    auto identity = [](double x) { return x; };

    auto pois = make_family("poisson");
    std::vector<std::vector<double>> samples;
    for (int k = 0; k < 5; ++k) samples.push_back(draw_sample(*pois, 2.0, 40, s));
    CHECK(linear_statistic_residual(*pois, identity, identity, samples) <= 1e-8);

    auto normal = make_family("normal_location");
    samples.clear();
    for (int k = 0; k < 5; ++k)
        samples.push_back(draw_sample(*normal, 0.5, 40, s));
    CHECK(linear_statistic_residual(*normal, identity, identity, samples) <= 1e-8);
}

TEST_CASE("moment-map residual detects a non-linear statistic") {
    RandomStream s(607);
    auto cauchy = make_family("cauchy_location");
    std::vector<std::vector<double>> samples;
    for (int k = 0; k < 8; ++k)
        samples.push_back(draw_sample(*cauchy, 0.0, 25, s));
    auto identity = [](double x) { return x; };
    CHECK(linear_statistic_residual(*cauchy, identity, identity, samples) > 0.01);
}

TEST_CASE("moment-map residual input validation") {
    auto pois = make_family("poisson");
    auto identity = [](double x) { return x; };
    CHECK_THROWS_AS(
        linear_statistic_residual(*pois, identity, identity, {}), DomainError);
    // an all-zero sample drives the MLE to the boundary
    const std::vector<std::vector<double>> degenerate{{0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(
        linear_statistic_residual(*pois, identity, identity, degenerate),
        NonConvergence);
}

TEST_CASE("product subset for the whole plane is immediate") {
    RandomStream s(710);
    auto always = [](std::span<const double>) { return true; };
    std::vector<std::function<double(RandomStream&)>> samplers{
        [](RandomStream& r) { return r.normal(); },
        [](RandomStream& r) { return r.normal(); }};
    const auto w = find_product_subset(always, samplers, s);
    REQUIRE(w.has_value());
    CHECK(w->box_freq == doctest::Approx(1.0));
    CHECK(w->y1.size() == 2);
    CHECK(w->y1[0] != w->y2[0]);
    CHECK(w->y1[1] != w->y2[1]);
    CHECK(vertices_in(always, *w));
}

TEST_CASE("product subset localizes into a half space") {
    RandomStream s(711);
    auto half = [](std::span<const double> x) { return x[0] > 0.0; };
    std::vector<std::function<double(RandomStream&)>> samplers{
        [](RandomStream& r) { return r.normal(); },
        [](RandomStream& r) { return r.normal(); }};
    const auto w = find_product_subset(half, samplers, s);
    REQUIRE(w.has_value());
    CHECK(w->y1[0] > 0.0);
    CHECK(w->y2[0] > 0.0);
    CHECK(vertices_in(half, *w));
    CHECK(w->indicator_evals > 0);
}

TEST_CASE("product subset inside a three-box union") {
    RandomStream s(712);
    auto ind = [](std::span<const double> x) {
        const double a = x[0], b = x[1], c = x[2];
        if (c < 0.5) return true;
        if (b <= 0.8) return true;
        return a <= 0.6;
    };
    std::vector<std::function<double(RandomStream&)>> samplers{
        [](RandomStream& r) { return r.uniform(); },
        [](RandomStream& r) { return r.uniform(); },
        [](RandomStream& r) { return r.uniform(); }};
    const auto w = find_product_subset(ind, samplers, s);
    REQUIRE(w.has_value());
    CHECK(vertices_in(ind, *w));
    for (int k = 0; k < 3; ++k) {
        CHECK(w->box.lo[k] <= std::min(w->y1[k], w->y2[k]));
        CHECK(w->box.hi[k] >= std::max(w->y1[k], w->y2[k]));
    }
}

TEST_CASE("product subset gives up gracefully on an impossible event") {
    RandomStream s(713);
    auto never = [](std::span<const double>) { return false; };
    std::vector<std::function<double(RandomStream&)>> samplers{
        [](RandomStream& r) { return r.uniform(); }};
    SubsetBudget tight;
    tight.localization_evals = 1500;
    tight.pair_attempts = 5;
    const auto w = find_product_subset(never, samplers, s, tight);
    CHECK(!w.has_value());
}

TEST_CASE("product subset dimension validation") {
    RandomStream s(714);
    auto always = [](std::span<const double>) { return true; };
    CHECK_THROWS_AS(find_product_subset(always, {}, s), DomainError);
    std::vector<std::function<double(RandomStream&)>> many(
        17, [](RandomStream& r) { return r.uniform(); });
    CHECK_THROWS_AS(find_product_subset(always, many, s), DomainError);
}

}  // TEST_SUITE
