#pragma once

#include <cmath>
#include <cstdint>

namespace timing {

// Counter-based randomness built on SplitMix64. Every latency entry is a pure
// function of (stream, round, from, to), so draws are reproducible regardless
// of sampling order and replications can run in parallel without shared state.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

// Sequential generator for stream-style use (leader election, test data).
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform in (0,1); never returns an endpoint so log() is safe.
    double next_u01() { return u01(next()); }

    static double u01(std::uint64_t bits) {
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Single standard-normal variate from two uniforms (Box-Muller, cosine leg).
// Hand-rolled instead of std::normal_distribution so output is identical
// across standard libraries.
inline double standard_normal(std::uint64_t bits_a, std::uint64_t bits_b) {
    const double u1 = SplitMix::u01(bits_a);
    const double u2 = SplitMix::u01(bits_b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Stream ids keep sub-streams of one replication independent.
enum class StreamTag : std::uint64_t {
    Latency = 0x4c41544e43590000ULL,
    Election = 0x454c454354000000ULL,
};

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t replication, StreamTag tag) {
    return mix(mix(seed, replication), static_cast<std::uint64_t>(tag));
}

// Key for one matrix entry of one round.
inline std::uint64_t entry_key(std::uint64_t stream, std::uint64_t round, std::uint32_t from,
                               std::uint32_t to) {
    return mix(mix(stream, round), (static_cast<std::uint64_t>(from) << 32) | to);
}

} // namespace timing
