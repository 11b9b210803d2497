#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "mimicaudit/errors.hpp"

namespace mimicaudit {

// Deterministic random source. mt19937_64 output is pinned by the standard,
// but std::shuffle and the std distributions are not — their results vary
// across standard libraries. Everything downstream of the raw generator is
// therefore hand-rolled here so a seed produces the same stream everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1): top 53 bits of the generator word.
    double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform index in [0, n).
    std::size_t next_index(std::size_t n) {
        if (n == 0) throw ParamError("next_index: n must be positive");
        return static_cast<std::size_t>(gen_() % n);
    }

    // Standard normal via Box-Muller. Two uniforms per draw, no caching of the
    // sine branch: one draw == exactly two generator words, always.
    double next_normal() {
        const double u1 = 1.0 - next_double();  // (0, 1]: keeps log() finite
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Fisher-Yates, back to front.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = next_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace mimicaudit
