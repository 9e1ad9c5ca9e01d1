#include "mlelab/rng.hpp"

#include <cmath>

#include "mlelab/errors.hpp"
#include "mlelab/special.hpp"

namespace mlelab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix(s);
}

RandomStream RandomStream::child(std::uint64_t k1, std::uint64_t k2,
                                 std::uint64_t k3) const {
    std::uint64_t s = seed_;
    std::uint64_t h = splitmix(s);
    s = h ^ (k1 * kGolden);
    h = splitmix(s);
    s = h ^ (k2 * 0xC2B2AE3D27D4EB4Full);
    h = splitmix(s);
    s = h ^ (k3 * 0x165667B19E3779F9ull);
    h = splitmix(s);
    return RandomStream(h);
}

std::uint64_t RandomStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RandomStream::uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open() {
    return 1.0 - uniform();
}

double RandomStream::normal() {
    for (;;) {
        const double v1 = 2.0 * uniform() - 1.0;
        const double v2 = 2.0 * uniform() - 1.0;
        const double s = v1 * v1 + v2 * v2;
        if (s >= 1.0 || s == 0.0) continue;
        return v1 * std::sqrt(-2.0 * std::log(s) / s);
    }
}

double RandomStream::exponential() {
    return -std::log(uniform_open());
}

double RandomStream::gamma(double shape) {
    if (!(shape > 0.0)) throw DomainError("RandomStream::gamma: shape must be > 0");
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = normal();
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = uniform_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

long RandomStream::poisson(double mean) {
    if (!(mean >= 0.0)) throw DomainError("RandomStream::poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // Knuth: product of uniforms.
        const double limit = std::exp(-mean);
        long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }
    // Hormann's PTRS transformed rejection.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = uniform() - 0.5;
        double v = uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return long(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const long k = long(kf);
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        if (lhs <= kf * log_mean - mean - log_factorial(k)) return k;
    }
}

double RandomStream::beta(double a, double b) {
    const double g1 = gamma(a);
    const double g2 = gamma(b);
    const double s = g1 + g2;
    if (s <= 0.0) return 0.5;  // unreachable in practice
    return g1 / s;
}

double RandomStream::cauchy() {
    return std::tan(3.14159265358979323846 * (uniform() - 0.5));
}

}  // namespace mlelab
