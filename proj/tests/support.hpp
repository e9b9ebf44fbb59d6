#pragma once

#include <cmath>
#include <cstdint>

#include "bgs/matrix.hpp"
#include "bgs/precision.hpp"
#include "bgs/random.hpp"
#include "bgs/testmats.hpp"

namespace bgs::test {

inline constexpr double u32 = F32F64::working_unit_roundoff;

template <typename T>
Matrix<T> uniform_matrix(index_t rows, index_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix<T> a(rows, cols);
    for (index_t k = 0; k < a.size(); ++k) {
        a.data()[k] = static_cast<T>(rng.uniform(-1.0, 1.0));
    }
    return a;
}

/// Random binary32 matrix with log-spaced singular values and condition kappa.
inline Matrix<float> conditioned_f32(index_t m, index_t n, double kappa, std::uint64_t seed) {
    return round_to<float>(
        testmats::with_singular_values(m, testmats::log_spectrum(n, kappa), seed));
}

/// Plain binary64 product, independent of the library's gemm.
template <typename A, typename B>
Matrix<double> naive_product(const Matrix<A>& a, const Matrix<B>& b) {
    Matrix<double> c(a.rows(), b.cols());
    for (index_t i = 0; i < a.rows(); ++i) {
        for (index_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (index_t l = 0; l < a.cols(); ++l) {
                acc += static_cast<double>(a(i, l)) * static_cast<double>(b(l, j));
            }
            c(i, j) = acc;
        }
    }
    return c;
}

template <typename A, typename B>
double max_abs_diff(const Matrix<A>& a, const Matrix<B>& b) {
    double d = 0.0;
    for (index_t j = 0; j < a.cols(); ++j) {
        for (index_t i = 0; i < a.rows(); ++i) {
            d = std::max(d, std::abs(static_cast<double>(a(i, j)) - static_cast<double>(b(i, j))));
        }
    }
    return d;
}

}  // namespace bgs::test
