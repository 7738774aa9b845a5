// rng.hpp
// Seedable, splittable uniform sampling. Output is bit-identical across
// platforms: mt19937_64 is fully specified and the conversions below avoid
// the implementation-defined standard distributions.
#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace lipval {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for an independent child stream (e.g. one per trace).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

class UniformSampler {
public:
    explicit UniformSampler(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    void fill_unit(std::span<double> z) noexcept {
        for (double& v : z) v = uniform();
    }

    // Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        for (;;) {
            const std::uint64_t r = engine_();
            if (r < limit) return r % bound;
        }
    }

    std::uint64_t bits() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace lipval
