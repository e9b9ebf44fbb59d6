#pragma once

// Seeded generators for the three stress families. Each matrix is built in
// binary64 and rounded once to the requested working type.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgs/densela.hpp"
#include "bgs/matrix.hpp"
#include "bgs/precision.hpp"
#include "bgs/random.hpp"

namespace bgs::testmats {

/// Lauchli matrix: a row of ones over eta * I, zero-padded to m rows.
struct LaeuchliParams {
    index_t m = 1000;
    index_t p = 100;
    index_t s = 5;
    double eta = 1e-3;
};

/// Blocks [v_k, A v_k, ..., A^{s-1} v_k] with A diagonal, spectrum in (0.1, 10).
struct MonomialParams {
    index_t m = 1000;
    index_t p = 120;
    index_t s = 2;
    std::uint64_t seed = 1;
};

/// Near-copies of one ill-conditioned base block, glued side by side.
/// c1 is the base block's log10 condition number, c2 the log10 gluing gap.
struct GluedParams {
    index_t m = 1000;
    index_t p = 50;
    index_t s = 4;
    double c1 = 1.0;
    double c2 = 1.0;
    std::uint64_t seed = 1;
};

template <typename T>
Matrix<T> laeuchli(const LaeuchliParams& prm) {
    const index_t n = prm.p * prm.s;
    if (prm.p < 1 || prm.s < 1) {
        throw DimensionError("laeuchli: p and s must be positive");
    }
    if (n + 1 > prm.m) {
        throw DimensionError("laeuchli: need n + 1 <= m (n = " + std::to_string(n) +
                             ", m = " + std::to_string(prm.m) + ")");
    }
    if (!(prm.eta > 0.0 && prm.eta < 1.0)) {
        throw std::invalid_argument("laeuchli: eta must lie in (0, 1)");
    }
    const T eta = round_to<T>(prm.eta);
    Matrix<T> x(prm.m, n);
    for (index_t j = 0; j < n; ++j) {
        x(0, j) = T(1);
        x(j + 1, j) = eta;
    }
    return x;
}

/// Diagonal of the monomial operator: m points evenly spaced in (0.1, 10)
/// with a half-step offset at both ends.
inline std::vector<double> monomial_spectrum(index_t m) {
    std::vector<double> lambda(static_cast<std::size_t>(m));
    for (index_t i = 0; i < m; ++i) {
        lambda[static_cast<std::size_t>(i)] =
            0.1 + (static_cast<double>(i) + 0.5) * 9.9 / static_cast<double>(m);
    }
    return lambda;
}

template <typename T>
Matrix<T> monomial(const MonomialParams& prm) {
    const index_t n = prm.p * prm.s;
    if (prm.p < 1 || prm.s < 1 || n > prm.m) {
        throw DimensionError("monomial: need p, s >= 1 and p * s <= m");
    }
    const auto lambda = monomial_spectrum(prm.m);
    Rng rng(prm.seed);
    Matrix<double> x(prm.m, n);
    std::vector<double> v(static_cast<std::size_t>(prm.m));
    for (index_t k = 0; k < prm.p; ++k) {
        for (double& vi : v) {
            vi = rng.uniform();
        }
        const double norm = detail::scaled_norm2(v.data(), prm.m);
        for (double& vi : v) {
            vi /= norm;
        }
        for (index_t j = 0; j < prm.s; ++j) {
            double* col = &x(0, k * prm.s + j);
            for (index_t i = 0; i < prm.m; ++i) {
                col[i] = v[static_cast<std::size_t>(i)];
                v[static_cast<std::size_t>(i)] *= lambda[static_cast<std::size_t>(i)];
            }
        }
        // v now holds A^s v_k; it is regenerated for the next block.
    }
    return round_to<T>(x);
}

/// Block j (0-based) is (B + 10^-c2 N_j) * 10^(-c2 j / (p - 1)), where
/// B = U diag(logspace(0, -c1, s)) V^T and N_j is Gaussian with unit
/// Frobenius norm.
template <typename T>
Matrix<T> glued(const GluedParams& prm) {
    const index_t n = prm.p * prm.s;
    if (prm.p < 1 || prm.s < 1 || n > prm.m) {
        throw DimensionError("glued: need p, s >= 1 and p * s <= m");
    }
    if (prm.c1 < 0.0 || prm.c2 < 0.0) {
        throw std::invalid_argument("glued: c1 and c2 must be non-negative");
    }
    Rng rng(prm.seed);
    const Matrix<double> u = random_orthonormal(prm.m, prm.s, rng.split());
    const Matrix<double> v = random_orthonormal(prm.s, prm.s, rng.split());
    Matrix<double> us = u;
    for (index_t j = 0; j < prm.s; ++j) {
        const double frac =
            prm.s == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(prm.s - 1);
        const double sigma = std::pow(10.0, -prm.c1 * frac);
        for (double& e : us.col(j)) {
            e *= sigma;
        }
    }
    const Matrix<double> base = gemm(us, v, Trans::no, Trans::yes);

    const double gap = std::pow(10.0, -prm.c2);
    const double denom = static_cast<double>(std::max<index_t>(prm.p - 1, 1));
    Matrix<double> x(prm.m, n);
    for (index_t b = 0; b < prm.p; ++b) {
        Matrix<double> noise = gaussian_matrix(prm.m, prm.s, rng);
        const double nn = frobenius_norm(noise);
        const double scale = std::pow(10.0, -prm.c2 * static_cast<double>(b) / denom);
        for (index_t j = 0; j < prm.s; ++j) {
            for (index_t i = 0; i < prm.m; ++i) {
                x(i, b * prm.s + j) = (base(i, j) + gap * noise(i, j) / nn) * scale;
            }
        }
    }
    return round_to<T>(x);
}

/// U * diag(sigma) * V^T in binary64 with seeded random orthonormal U (m x n)
/// and V (n x n); its singular values are sigma up to binary64 rounding.
inline Matrix<double> with_singular_values(index_t m, const std::vector<double>& sigma,
                                           std::uint64_t seed) {
    const auto n = static_cast<index_t>(sigma.size());
    if (n < 1 || n > m) {
        throw DimensionError("with_singular_values: need 1 <= len(sigma) <= m");
    }
    Rng rng(seed);
    Matrix<double> us = random_orthonormal(m, n, rng.split());
    const Matrix<double> v = random_orthonormal(n, n, rng.split());
    for (index_t j = 0; j < n; ++j) {
        for (double& e : us.col(j)) {
            e *= sigma[static_cast<std::size_t>(j)];
        }
    }
    return gemm(us, v, Trans::no, Trans::yes);
}

/// n values logarithmically spaced from 1 down to 1/kappa.
inline std::vector<double> log_spectrum(index_t n, double kappa) {
    std::vector<double> sigma(static_cast<std::size_t>(n));
    for (index_t j = 0; j < n; ++j) {
        const double t = n == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n - 1);
        sigma[static_cast<std::size_t>(j)] = std::pow(kappa, -t);
    }
    return sigma;
}

}  // namespace bgs::testmats
