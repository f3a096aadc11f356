#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace unmix {

// Deterministic random helpers. The mt19937_64 engine is fully specified by
// the standard; the std:: distributions are not, so uniform/normal are done
// by hand here to keep generated data byte-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (no cached spare; branch-free ordering).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift; bias is negligible for the small n used here.
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 step, used to derive independent stream seeds from a base seed
/// plus structural indices (bag id, SNR index, ...).
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = mix_seed(base ^ 0x5851f42d4c957f2dULL);
    s = mix_seed(s ^ a);
    s = mix_seed(s ^ (b + 0x14057b7ef767814fULL));
    s = mix_seed(s ^ (c + 0x27bb2ee687b0b0fdULL));
    return s;
}

}  // namespace unmix
