#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>

namespace wgn {

using Engine = std::mt19937_64;

// Derives an independent stream seed from (seed, stream index). SplitMix64
// finalizer; serial and sharded callers get identical streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seeds the underlying engine on first draw. Blocks that never need random
// numbers (the common case) never pay for engine construction.
class LazyEngine {
public:
    using result_type = Engine::result_type;

    explicit LazyEngine(std::uint64_t seed) noexcept : seed_(seed) {}

    static constexpr result_type min() { return Engine::min(); }
    static constexpr result_type max() { return Engine::max(); }

    result_type operator()()
    {
        if (!engine_) engine_.emplace(seed_);
        return (*engine_)();
    }

    bool used() const noexcept { return engine_.has_value(); }

private:
    std::uint64_t seed_;
    std::optional<Engine> engine_;
};

template <std::uniform_random_bit_generator G>
void fill_standard_normal(std::span<double> out, G& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out) v = normal(rng);
}

// Standard circularly-symmetric complex Gaussian: E|z|^2 = 1.
template <std::uniform_random_bit_generator G>
std::complex<double> standard_complex_normal(G& rng)
{
    std::normal_distribution<double> normal(0.0, 0.70710678118654752440);
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

} // namespace wgn
