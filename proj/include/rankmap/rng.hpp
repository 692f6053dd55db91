#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rankmap/errors.hpp"

namespace rankmap {

// Seeded generator with hand-rolled distributions. Standard-library
// distribution objects are implementation-defined, so uniform and Gaussian
// draws are derived directly from the engine's bits to keep every sampled
// byte reproducible for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform index in [0, n).
    std::size_t index(std::size_t n) {
        if (n == 0) throw InvalidArgumentError("Rng::index: n must be positive");
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(eng_()) * n) >> 64);
    }

    // Draws one index from an unnormalized weight vector by inverse CDF.
    // Weights must be non-negative with a positive total.
    std::size_t sample_discrete(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0 || !std::isfinite(w))
                throw InvalidArgumentError("Rng::sample_discrete: weights must be finite and non-negative");
            total += w;
        }
        if (total <= 0.0)
            throw DegenerateInputError("Rng::sample_discrete: all weights are zero");
        const double target = uniform01() * total;
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > 0.0) last_positive = i;
            acc += weights[i];
            if (target < acc && weights[i] > 0.0) return i;
        }
        return last_positive;  // target landed on the rounding tail
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rankmap
