#include "skewimpute/rng.hpp"

#include <cmath>

#include "skewimpute/errors.hpp"
#include "skewimpute/normal.hpp"

namespace skewimpute {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer: a bijective scramble, so distinct inputs cannot
// collide and chained derivations stay well separated.
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t derive(std::uint64_t key, std::uint64_t tag) {
    return mix64(key + kGolden * (tag + 1));
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : key_(mix64(seed + kGolden)) { seed_state(); }

RandomStream::RandomStream(std::uint64_t key, derived_tag) : key_(key) { seed_state(); }

void RandomStream::seed_state() {
    for (int i = 0; i < 4; ++i) s_[i] = mix64(key_ + kGolden * static_cast<std::uint64_t>(i + 1));
    // All-zero state is unreachable through mix64 of distinct inputs, but a
    // belt keeps xoshiro well-defined regardless.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = kGolden;
}

RandomStream RandomStream::fork(std::uint64_t tag) const {
    return RandomStream(derive(key_, tag), derived_tag{});
}

// xoshiro256++
std::uint64_t RandomStream::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RandomStream::uniform01() {
    // 53 random bits centered in the bin: strictly inside (0, 1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return std_normal_quantile(uniform01()); }

double RandomStream::normal(double mu, double sigma) { return mu + sigma * normal(); }

double RandomStream::gamma(double shape) {
    if (shape < 1.0) {
        // Boost a shape+1 draw down: G(a) = G(a+1) * U^(1/a).
        const double u = uniform01();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double RandomStream::chi_square(double df) {
    if (!(df > 0.0) || !std::isfinite(df)) throw InvalidInput("chi_square: df must be positive");
    return 2.0 * gamma(df / 2.0);
}

double RandomStream::exponential() { return chi_square(2.0) / 2.0; }

}  // namespace skewimpute
