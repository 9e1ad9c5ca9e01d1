#pragma once

#include <cstdint>

namespace mlelab {

/// Deterministic xoshiro256++ stream with SplitMix64 seeding.
///
/// Standard-library distributions are implementation defined, so every sampler
/// here is written out explicitly: the same seed produces the same draws on
/// every platform and toolchain.  Parallel experiments derive one child stream
/// per (n, replicate) key, which makes results independent of how replicates
/// are partitioned across worker threads.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed);

    /// Child stream keyed by up to three 64-bit values.  Children with
    /// distinct keys are statistically independent of each other and of the
    /// parent; deriving a child does not disturb the parent's state.
    RandomStream child(std::uint64_t k1, std::uint64_t k2 = 0,
                       std::uint64_t k3 = 0) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform on (0, 1]; safe to pass to log().
    double uniform_open();

    /// Standard normal via the polar (Marsaglia) method.
    double normal();

    /// Exponential with rate 1.
    double exponential();

    /// Gamma with given shape, scale 1 (Marsaglia-Tsang, boosted for shape < 1).
    double gamma(double shape);

    /// Poisson with the given mean (Knuth below mean 10, PTRS above).
    long poisson(double mean);

    /// Beta(a, b) via two gamma draws.
    double beta(double a, double b);

    /// Standard Cauchy.
    double cauchy();

  private:
    std::uint64_t seed_;      // retained so children can re-derive
    std::uint64_t state_[4];
};

}  // namespace mlelab
