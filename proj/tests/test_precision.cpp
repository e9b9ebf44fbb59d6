#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "bgs/precision.hpp"
#include "support.hpp"

using namespace bgs;

TEST(Precision, UnitRoundoffValues) {
    EXPECT_EQ(F32F64::unit_roundoff(Level::working), std::ldexp(1.0, -24));
    EXPECT_EQ(F32F64::unit_roundoff(Level::high), std::ldexp(1.0, -53));
    EXPECT_NEAR(unit_roundoff<double>(), 1.11e-16, 1e-18);
    EXPECT_NEAR(F32F64::working_unit_roundoff, 5.96e-8, 1e-10);
}

TEST(Precision, PairSquaresWorkingRoundoff) {
    constexpr double uw = F32F64::working_unit_roundoff;
    constexpr double uh = F32F64::high_unit_roundoff;
    EXPECT_GT(uw, 0.0);
    EXPECT_GT(uh, 0.0);
    EXPECT_LE(uh, uw * uw * 1e3);
    EXPECT_EQ(F32F64::name, "f32f64");
}

TEST(Precision, PromoteIsExact) {
    const Matrix<float> one{{1.0f}};
    EXPECT_EQ(promote<double>(one)(0, 0), 1.0);

    const Matrix<float> tenth{{0.1f}};
    const double promoted = promote<double>(tenth)(0, 0);
    EXPECT_EQ(promoted, static_cast<double>(0.1f));
    EXPECT_NE(promoted, 0.1);
}

TEST(Precision, RoundTripIsIdentity) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Matrix<float> a = test::uniform_matrix<float>(13, 7, seed);
        a(0, 0) = std::numeric_limits<float>::denorm_min();
        a(1, 0) = std::numeric_limits<float>::max();
        EXPECT_EQ(round_to<float>(promote<double>(a)), a);
    }
}

TEST(Precision, RoundingBelowHalfUlpGivesOne) {
    const double x = 1.0 + F32F64::working_unit_roundoff / 4.0;
    EXPECT_EQ(round_to<float>(x), 1.0f);
}

TEST(Precision, RoundingTiesToEven) {
    // 1 + u sits exactly halfway between 1 and 1 + 2u; the even neighbour is 1.
    EXPECT_EQ(round_to<float>(1.0 + std::ldexp(1.0, -24)), 1.0f);
    // 1 + 3u is halfway between 1 + 2u and 1 + 4u; even is 1 + 4u.
    EXPECT_EQ(round_to<float>(1.0 + 3.0 * std::ldexp(1.0, -24)),
              static_cast<float>(1.0 + std::ldexp(1.0, -22)));
}

TEST(Precision, RoundingErrorWithinUnitRoundoff) {
    const double pi = std::numbers::pi;
    const float r = round_to<float>(pi);
    EXPECT_LE(std::abs(static_cast<double>(r) - pi) / pi, 6.0e-8);

    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::ldexp(rng.uniform(1.0, 2.0), static_cast<int>(rng.uniform(-60, 60)));
        const double err = std::abs(static_cast<double>(round_to<float>(v)) - v);
        EXPECT_LE(err, F32F64::working_unit_roundoff * std::abs(v));
    }
}

TEST(Precision, RoundingIsMonotone) {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-10.0, 10.0);
        const double b = a + std::abs(rng.normal()) * 1e-7;
        EXPECT_LE(round_to<float>(a), round_to<float>(b));
    }
}

TEST(Precision, OverflowIsAnError) {
    EXPECT_THROW(round_to<float>(1e300), std::overflow_error);
    Matrix<double> a{{1.0, -1e40}};
    EXPECT_THROW(round_to<float>(a), std::overflow_error);
    // Non-finite inputs pass through; only finite-to-infinite is an error.
    EXPECT_TRUE(std::isinf(round_to<float>(std::numeric_limits<double>::infinity())));
}

TEST(Precision, UpperTriangularRoundKeepsStructure) {
    UpperTriangular<double> r(Matrix<double>{{1.0, 0.1}, {0.0, 3.0}});
    const auto rf = round_to<float>(r);
    EXPECT_EQ(rf(0, 1), 0.1f);
    EXPECT_EQ(rf(1, 0), 0.0f);
}
