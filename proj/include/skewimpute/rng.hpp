#pragma once

#include <cstdint>

namespace skewimpute {

// Reproducible random stream with cheap independent substreams.
//
// A stream is identified by a 64-bit derivation key. fork(tag) derives a
// child stream keyed by (key, tag) without consuming any state from the
// parent, so substream layouts are a property of the code path, not of how
// many draws happened to be taken first. The generator is xoshiro256++
// seeded through splitmix-style mixing, and all variates (uniform, normal,
// chi-square) are produced from the raw bit stream directly — no standard
// library distributions — so replay is bit-identical across platforms.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    // Independent child stream; deterministic in (key(), tag).
    RandomStream fork(std::uint64_t tag) const;

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64();

    // Uniform on the open interval (0, 1).
    double uniform01();

    // Standard normal via the inverse CDF.
    double normal();
    double normal(double mu, double sigma);

    // Chi-square with (possibly fractional) df > 0.
    double chi_square(double df);

    // Standard exponential, mean 1 (defined as chi_square(2) / 2).
    double exponential();

private:
    struct derived_tag {};
    RandomStream(std::uint64_t key, derived_tag);
    void seed_state();

    // Gamma(shape, scale 1), shape > 0 (Marsaglia-Tsang).
    double gamma(double shape);

    std::uint64_t key_;
    std::uint64_t s_[4];
};

}  // namespace skewimpute
