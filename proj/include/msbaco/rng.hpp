#pragma once

#include "msbaco/types.hpp"

#include <cstdint>
#include <random>
#include <span>

namespace msbaco {

/// SplitMix64 finalizer, used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for sub-stream `stream` of `seed`. Chains for nested streams:
/// derive_seed(derive_seed(s, gen), ant).
constexpr Seed derive_seed(Seed seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

/// Named stream tags so call sites do not collide.
enum class Stream : std::uint64_t {
    split = 1,
    init = 2,
    train = 3,
    phase = 4,
    colony = 5,
    finetune = 6,
    final_phase = 7,
};

constexpr Seed derive_seed(Seed seed, Stream s) {
    return derive_seed(seed, static_cast<std::uint64_t>(s));
}

/// mt19937_64 with distribution code written out so sequences are identical
/// across standard library implementations.
class Rng {
public:
    explicit Rng(Seed seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n) {
        const std::uint64_t bound = n;
        // Largest multiple of n representable; draws above it are rejected.
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
        std::uint64_t x = engine_();
        while (x > limit) x = engine_();
        return static_cast<std::size_t>(x % bound);
    }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace msbaco
