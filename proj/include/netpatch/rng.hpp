#pragma once
#include <cstdint>
#include <cmath>

// Deterministic, platform-independent random streams. The standard library's
// distribution objects are not bit-stable across implementations, so every
// draw here is built from splitmix64 plus explicit inverse-CDF transforms.
namespace netpatch::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Combines a seed with stream identifiers into an independent substream key.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a) {
    return splitmix64(seed ^ splitmix64(a + 0x632be59bd9b4e019ULL));
}
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix(mix(seed, a), b);
}

class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform on (0, 1]: never returns 0, so -log() is always finite.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
    }

    double exponential(double rate) {
        return -std::log(next_unit()) / rate;
    }

    // Uniform integer in [0, bound) via rejection-free Lemire reduction.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

private:
    std::uint64_t state_;
};

} // namespace netpatch::rng
