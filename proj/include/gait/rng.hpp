#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gait {

// splitmix64; used to derive independent stream seeds from one master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream));
}

// mt19937_64 wrapper with fixed-draw-count conversions. The std:: distributions
// are avoided on purpose: they are allowed to consume a variable number of
// engine values, which would make draw accounting nondeterministic.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // [0, 1), 53-bit resolution, exactly one engine draw.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, exactly two engine draws.
    double normal(double mean = 0.0, double stddev = 1.0) {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * mag * std::cos(2.0 * std::numbers::pi * u2);
    }

    // [0, n), exactly one engine draw. Modulo bias is irrelevant at our n.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace gait
