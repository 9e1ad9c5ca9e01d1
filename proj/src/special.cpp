#include "mlelab/special.hpp"

#include <array>
#include <vector>

#include "mlelab/errors.hpp"

namespace mlelab {

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: x must be > 0");
    return std::lgamma(x);
}

double log_beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("log_beta: a, b must be > 0");
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_factorial(long x) {
    if (x < 0) throw DomainError("log_factorial: x must be >= 0");
    static const std::vector<double> table = [] {
        std::vector<double> t(4096);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::lgamma(double(i) + 1.0);
        return t;
    }();
    if (std::size_t(x) < table.size()) return table[std::size_t(x)];
    return std::lgamma(double(x) + 1.0);
}

namespace {

// Asymptotic tails use the Bernoulli numbers B_2..B_14; below the cutoff the
// recurrence psi(x) = psi(x+1) - 1/x (and its derivatives) shifts x upward.
constexpr double kPolygammaCutoff = 10.0;
constexpr std::array<double, 7> kBernoulli = {
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};

}  // namespace

double digamma(double x) {
    if (!(x > 0.0)) throw DomainError("digamma: x must be > 0");
    double acc = 0.0;
    while (x < kPolygammaCutoff) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // psi(x) ~ ln x - 1/(2x) - sum B_2k / (2k x^{2k})
    double inv2 = 1.0 / (x * x);
    double series = 0.0;
    double power = inv2;
    for (std::size_t k = 0; k < kBernoulli.size(); ++k) {
        series += kBernoulli[k] * power / (2.0 * double(k + 1));
        power *= inv2;
    }
    return acc + std::log(x) - 0.5 / x - series;
}

double trigamma(double x) {
    if (!(x > 0.0)) throw DomainError("trigamma: x must be > 0");
    double acc = 0.0;
    while (x < kPolygammaCutoff) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // psi'(x) ~ 1/x + 1/(2x^2) + sum B_2k / x^{2k+1}
    double inv = 1.0 / x;
    double inv2 = inv * inv;
    double series = 0.0;
    double power = inv * inv2;
    for (std::size_t k = 0; k < kBernoulli.size(); ++k) {
        series += kBernoulli[k] * power;
        power *= inv2;
    }
    return acc + inv + 0.5 * inv2 + series;
}

double tetragamma(double x) {
    if (!(x > 0.0)) throw DomainError("tetragamma: x must be > 0");
    double acc = 0.0;
    while (x < kPolygammaCutoff) {
        acc -= 2.0 / (x * x * x);
        x += 1.0;
    }
    // psi''(x) ~ -1/x^2 - 1/x^3 - sum B_2k (2k+1) / x^{2k+2}
    double inv = 1.0 / x;
    double inv2 = inv * inv;
    double series = 0.0;
    double power = inv2 * inv2;
    for (std::size_t k = 0; k < kBernoulli.size(); ++k) {
        series += kBernoulli[k] * double(2 * (k + 1) + 1) * power;
        power *= inv2;
    }
    return acc - inv2 - inv * inv2 - series;
}

}  // namespace mlelab
