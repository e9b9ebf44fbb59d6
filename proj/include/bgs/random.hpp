#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "bgs/matrix.hpp"

namespace bgs {

/// Seeded generator with distributions defined here rather than through
/// <random>'s distribution classes, whose algorithms differ between standard
/// libraries. Output depends only on the seed (and libm's log/cos/sin).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 == 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Fresh seed for a sub-stream.
    std::uint64_t split() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// rows x cols matrix of independent standard normals, filled column by column.
inline Matrix<double> gaussian_matrix(index_t rows, index_t cols, Rng& rng) {
    Matrix<double> g(rows, cols);
    for (index_t k = 0; k < g.size(); ++k) {
        g.data()[k] = rng.normal();
    }
    return g;
}

}  // namespace bgs
