#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <type_traits>

#include "bgs/matrix.hpp"

namespace bgs {

/// Unit roundoff of a binary floating-point type under round-to-nearest.
template <typename T>
constexpr double unit_roundoff() noexcept {
    static_assert(std::numeric_limits<T>::is_iec559);
    return static_cast<double>(std::numeric_limits<T>::epsilon()) / 2.0;
}

/// True when every value of From is exactly representable in To.
template <typename From, typename To>
inline constexpr bool exactly_embeds_v =
    std::numeric_limits<To>::digits >= std::numeric_limits<From>::digits &&
    std::numeric_limits<To>::max_exponent >= std::numeric_limits<From>::max_exponent &&
    std::numeric_limits<To>::min_exponent <= std::numeric_limits<From>::min_exponent;

enum class Level { working, high };

/// A working precision paired with a higher precision whose unit roundoff is
/// (up to a small constant) the square of the working one. Algorithms take the
/// pair as a template argument so that adding a pair never touches them.
template <typename Working, typename High>
struct PrecisionPair {
    using working_type = Working;
    using high_type = High;

    static_assert(exactly_embeds_v<Working, High>,
                  "high precision must contain the working precision");
    static_assert(unit_roundoff<High>() <=
                      unit_roundoff<Working>() * unit_roundoff<Working>() * 1e3,
                  "high precision must be roughly the square of working");

    static constexpr double working_unit_roundoff = unit_roundoff<Working>();
    static constexpr double high_unit_roundoff = unit_roundoff<High>();

    static constexpr double unit_roundoff(Level which) noexcept {
        return which == Level::working ? working_unit_roundoff : high_unit_roundoff;
    }
};

/// binary32 working, binary64 high. Selected by `--precision f32f64`.
struct F32F64 : PrecisionPair<float, double> {
    static constexpr std::string_view name = "f32f64";
};

/// Exact element-wise embedding into a wider type.
template <typename High, typename Working>
Matrix<High> promote(const Matrix<Working>& a) {
    static_assert(exactly_embeds_v<Working, High>);
    if constexpr (std::is_same_v<High, Working>) {
        return a;
    } else {
        Matrix<High> out(a.rows(), a.cols());
        const Working* src = a.data();
        High* dst = out.data();
        for (index_t k = 0; k < a.size(); ++k) {
            dst[k] = static_cast<High>(src[k]);
        }
        return out;
    }
}

/// Scalar round-to-nearest-even into Working. Finite values that leave the
/// working range are an error.
template <typename Working, typename High>
Working round_to(High v) {
    const auto r = static_cast<Working>(v);
    if (std::isinf(r) && std::isfinite(v)) {
        throw std::overflow_error("round_to: value overflows working precision");
    }
    return r;
}

/// Element-wise round-to-nearest-even into Working.
template <typename Working, typename High>
Matrix<Working> round_to(const Matrix<High>& a) {
    if constexpr (std::is_same_v<High, Working>) {
        return a;
    } else {
        Matrix<Working> out(a.rows(), a.cols());
        const High* src = a.data();
        Working* dst = out.data();
        for (index_t k = 0; k < a.size(); ++k) {
            dst[k] = round_to<Working>(src[k]);
        }
        return out;
    }
}

template <typename Working, typename High>
UpperTriangular<Working> round_to(const UpperTriangular<High>& r) {
    return UpperTriangular<Working>(round_to<Working>(r.matrix()));
}

}  // namespace bgs
